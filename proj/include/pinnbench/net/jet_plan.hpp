#pragma once

#include <algorithm>
#include <vector>

#include "pinnbench/core.hpp"

namespace pinnbench::net {

// A channel is one derivative quantity propagated alongside the value through
// the network. Supported shapes cover every residual in the case registry and
// their gradient-enhanced extensions:
//   Value              u
//   Pure{a, k}         d^k u / dx_a^k,            k <= 5
//   Mixed11{a, b}      d^2 u / dx_a dx_b          (a < b canonical)
//   Mixed21{a, b}      d^3 u / dx_a^2 dx_b
//   Mixed31{a, b}      d^4 u / dx_a^3 dx_b
//   Lap{axes}          sum over axes of d^2 u / dx_a^2  (cheaper than per-axis
//                      second derivatives when only the sum is needed)
// Mixed derivatives of three distinct axes never occur: base residuals use
// pure/Laplacian terms only, and one gradient pass on top adds at most one
// extra distinct axis.
enum class ChannelKind { Value, Pure, Mixed11, Mixed21, Mixed31, Lap };

struct Channel {
  ChannelKind kind = ChannelKind::Value;
  int a = -1;       // primary axis
  int b = -1;       // secondary axis (mixed kinds)
  int order = 0;    // k for Pure, total order otherwise
  std::vector<int> lap_axes;

  // dependency slots, filled by ChannelPlan::finalize; -1 when unused
  int z1a = -1, z2a = -1, z3a = -1, z4a = -1;  // pure derivs of axis a, orders 1..4
  int z1b = -1;                                // first deriv of axis b
  int m11 = -1, m21 = -1;                      // mixed deps for Mixed21/Mixed31
  std::vector<int> lap_d1;                     // first derivs for Lap

  bool same_as(ChannelKind k, int aa, int bb) const { return kind == k && a == aa && b == bb; }
};

struct ChannelPlan {
  std::vector<Channel> channels;  // index 0 is always Value
  int max_order = 0;              // highest sigma derivative used in forward

  int count() const { return int(channels.size()); }

  int find(ChannelKind k, int a = -1, int b = -1) const {
    for (int i = 0; i < count(); ++i)
      if (channels[i].same_as(k, a, b)) return i;
    return -1;
  }

  int require_channel(ChannelKind k, int a = -1, int b = -1) const {
    int i = find(k, a, b);
    pinnbench::require(i >= 0, "ChannelPlan: missing dependency channel");
    return i;
  }

  int add(ChannelKind k, int a = -1, int b = -1, const std::vector<int>& lap_axes = {}) {
    int existing = find(k, a, b);
    if (existing >= 0) return existing;
    require(k != ChannelKind::Pure, "ChannelPlan: use add_pure");
    Channel c;
    c.kind = k;
    c.a = a;
    c.b = b;
    c.lap_axes = lap_axes;
    switch (k) {
      case ChannelKind::Value: c.order = 0; break;
      case ChannelKind::Pure: break;
      case ChannelKind::Mixed11: c.order = 2; break;
      case ChannelKind::Mixed21: c.order = 3; break;
      case ChannelKind::Mixed31: c.order = 4; break;
      case ChannelKind::Lap: c.order = 2; break;
    }
    channels.push_back(c);
    return count() - 1;
  }

  int add_pure(int axis, int k) {
    require(k >= 1 && k <= 5, "ChannelPlan: pure order out of range");
    for (int i = 0; i < count(); ++i) {
      const Channel& c = channels[i];
      if (c.kind == ChannelKind::Pure && c.a == axis && c.order == k) return i;
    }
    if (k > 1) add_pure(axis, k - 1);
    Channel c;
    c.kind = ChannelKind::Pure;
    c.a = axis;
    c.order = k;
    channels.push_back(c);
    return count() - 1;
  }

  int add_mixed11(int a, int b) {
    if (a > b) std::swap(a, b);
    require(a != b, "ChannelPlan: mixed axes must differ");
    add_pure(a, 1);
    add_pure(b, 1);
    return add(ChannelKind::Mixed11, a, b);
  }

  int add_mixed21(int a, int b) {
    require(a != b, "ChannelPlan: mixed axes must differ");
    add_pure(a, 2);
    add_pure(b, 1);
    add_mixed11(a, b);
    return add(ChannelKind::Mixed21, a, b);
  }

  int add_mixed31(int a, int b) {
    require(a != b, "ChannelPlan: mixed axes must differ");
    add_pure(a, 3);
    add_pure(b, 1);
    add_mixed11(a, b);
    add_mixed21(a, b);
    return add(ChannelKind::Mixed31, a, b);
  }

  int add_lap(const std::vector<int>& axes) {
    for (int a : axes) add_pure(a, 1);
    return add(ChannelKind::Lap, -1, -1, axes);
  }

  int find_pure(int axis, int k) const {
    for (int i = 0; i < count(); ++i) {
      const Channel& c = channels[i];
      if (c.kind == ChannelKind::Pure && c.a == axis && c.order == k) return i;
    }
    return -1;
  }

  // Sorts channels into dependency order (value, then ascending total order)
  // and resolves dependency indices.
  void finalize() {
    if (find(ChannelKind::Value) < 0) channels.insert(channels.begin(), Channel{});
    std::stable_sort(channels.begin(), channels.end(), [](const Channel& x, const Channel& y) {
      auto rank = [](const Channel& c) {
        if (c.kind == ChannelKind::Value) return 0;
        return c.order;
      };
      return rank(x) < rank(y);
    });
    max_order = 0;
    for (Channel& c : channels) {
      max_order = std::max(max_order, c.order);
      if (c.kind == ChannelKind::Pure) {
        if (c.order >= 2) c.z1a = find_pure(c.a, 1);
        if (c.order >= 3) c.z2a = find_pure(c.a, 2);
        if (c.order >= 4) c.z3a = find_pure(c.a, 3);
        if (c.order >= 5) c.z4a = find_pure(c.a, 4);
      }
    }
    for (Channel& c : channels) {
      switch (c.kind) {
        case ChannelKind::Mixed11:
          c.z1a = find_pure(c.a, 1);
          c.z1b = find_pure(c.b, 1);
          break;
        case ChannelKind::Mixed21:
          c.z1a = find_pure(c.a, 1);
          c.z2a = find_pure(c.a, 2);
          c.z1b = find_pure(c.b, 1);
          c.m11 = find(ChannelKind::Mixed11, std::min(c.a, c.b), std::max(c.a, c.b));
          break;
        case ChannelKind::Mixed31:
          c.z1a = find_pure(c.a, 1);
          c.z2a = find_pure(c.a, 2);
          c.z3a = find_pure(c.a, 3);
          c.z1b = find_pure(c.b, 1);
          c.m11 = find(ChannelKind::Mixed11, std::min(c.a, c.b), std::max(c.a, c.b));
          c.m21 = find(ChannelKind::Mixed21, c.a, c.b);
          break;
        case ChannelKind::Lap:
          c.lap_d1.clear();
          for (int a : c.lap_axes) c.lap_d1.push_back(find_pure(a, 1));
          break;
        default:
          break;
      }
    }
  }
};

inline ChannelPlan value_only_plan() {
  ChannelPlan p;
  p.add(ChannelKind::Value);
  p.finalize();
  return p;
}

}  // namespace pinnbench::net
