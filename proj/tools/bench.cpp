// bench CLI: run benchmark configurations, list cases/methods, evaluate
// checkpoints. Wired up as harness modules land.
#include <cstdio>

int main() {
  std::printf("bench: not wired yet\n");
  return 2;
}
