#pragma once

// Finite unions of half-open arcs (a, b] on the circle R/Z with exact Q(sqrt5)
// endpoints. Stored normalized: 0 <= a < b <= 1, sorted, disjoint, and with
// touching arcs merged. An arc crossing 0 is split into (a, 1] and (0, b].

#include <algorithm>
#include <cstdint>
#include <vector>

#include "bfree/qsqrt5.hpp"

namespace bfree {

struct Arc {
  QSqrt5 a;
  QSqrt5 b;
  QSqrt5 length() const { return b - a; }
};

class CircleIntervalSet {
 public:
  CircleIntervalSet() = default;

  // Arcs (a, b] with arbitrary real a < b and b - a <= 1, reduced mod 1.
  static CircleIntervalSet from_arcs(const std::vector<Arc>& arcs) {
    std::vector<Arc> pieces;
    const QSqrt5 one(Rational(1)), zero(Rational(0));
    for (const auto& arc : arcs) {
      QSqrt5 len = arc.b - arc.a;
      if (len.sign() < 0) throw ValidationError("arc with b < a");
      if (len.sign() == 0) continue;
      if (len > one) throw ValidationError("arc longer than the circle");
      if (len == one) {
        pieces.push_back({zero, one});
        continue;
      }
      QSqrt5 a0 = arc.a.frac();
      QSqrt5 b0 = a0 + len;
      if (b0 <= one) {
        pieces.push_back({a0, b0});
      } else {
        pieces.push_back({a0, one});
        pieces.push_back({zero, b0 - one});
      }
    }
    CircleIntervalSet s;
    s.arcs_ = merge_sorted(std::move(pieces));
    return s;
  }

  static CircleIntervalSet single(const QSqrt5& a, const QSqrt5& b) { return from_arcs({{a, b}}); }

  const std::vector<Arc>& arcs() const { return arcs_; }
  std::size_t size() const { return arcs_.size(); }
  bool empty() const { return arcs_.empty(); }

  QSqrt5 measure() const {
    QSqrt5 m;
    for (const auto& arc : arcs_) m += arc.b - arc.a;
    return m;
  }

  // Number of arcs when the pieces (a, 1] and (0, b] are counted as one arc.
  std::size_t circle_arc_count() const {
    if (arcs_.size() >= 2 && arcs_.front().a.sign() == 0 && arcs_.back().b == QSqrt5(Rational(1)))
      return arcs_.size() - 1;
    return arcs_.size();
  }

  // Membership of x mod 1; the point 0 is the point 1.
  bool contains(const QSqrt5& x) const {
    QSqrt5 y = x.frac();
    if (y.sign() == 0) y = QSqrt5(Rational(1));
    // first arc with b >= y
    auto it = std::lower_bound(arcs_.begin(), arcs_.end(), y, [](const Arc& arc, const QSqrt5& v) { return arc.b < v; });
    return it != arcs_.end() && it->a < y;
  }

  CircleIntervalSet translated(const QSqrt5& h) const {
    std::vector<Arc> shifted;
    shifted.reserve(arcs_.size());
    for (const auto& arc : arcs_) shifted.push_back({arc.a + h, arc.b + h});
    return from_arcs(shifted);
  }

  friend CircleIntervalSet set_union(const CircleIntervalSet& x, const CircleIntervalSet& y) {
    return combine(x, y, [](bool a, bool b) { return a || b; });
  }
  friend CircleIntervalSet set_intersection(const CircleIntervalSet& x, const CircleIntervalSet& y) {
    return combine(x, y, [](bool a, bool b) { return a && b; });
  }
  friend CircleIntervalSet set_difference(const CircleIntervalSet& x, const CircleIntervalSet& y) {
    return combine(x, y, [](bool a, bool b) { return a && !b; });
  }
  friend CircleIntervalSet set_symmetric_difference(const CircleIntervalSet& x, const CircleIntervalSet& y) {
    return combine(x, y, [](bool a, bool b) { return a != b; });
  }

  friend bool operator==(const CircleIntervalSet& x, const CircleIntervalSet& y) {
    if (x.arcs_.size() != y.arcs_.size()) return false;
    for (std::size_t i = 0; i < x.arcs_.size(); ++i)
      if (x.arcs_[i].a != y.arcs_[i].a || x.arcs_[i].b != y.arcs_[i].b) return false;
    return true;
  }

 private:
  static std::vector<Arc> merge_sorted(std::vector<Arc> pieces) {
    std::sort(pieces.begin(), pieces.end(), [](const Arc& u, const Arc& v) { return u.a < v.a; });
    std::vector<Arc> out;
    for (auto& p : pieces) {
      if (!out.empty() && p.a <= out.back().b) {
        if (p.b > out.back().b) out.back().b = std::move(p.b);
      } else {
        out.push_back(std::move(p));
      }
    }
    return out;
  }

  // Sweep over the merged breakpoints of both sets; membership is constant on
  // each piece (x_i, x_{i+1}].
  template <class Op>
  static CircleIntervalSet combine(const CircleIntervalSet& x, const CircleIntervalSet& y, Op op) {
    struct Ev {
      const QSqrt5* pos;
      int set;  // 0 or 1
      bool enter;
    };
    std::vector<Ev> ev;
    ev.reserve(2 * (x.arcs_.size() + y.arcs_.size()));
    // each list is sorted; merge the two endpoint sequences
    std::vector<Ev> ex, ey;
    for (const auto& arc : x.arcs_) {
      ex.push_back({&arc.a, 0, true});
      ex.push_back({&arc.b, 0, false});
    }
    for (const auto& arc : y.arcs_) {
      ey.push_back({&arc.a, 1, true});
      ey.push_back({&arc.b, 1, false});
    }
    std::merge(ex.begin(), ex.end(), ey.begin(), ey.end(), std::back_inserter(ev),
               [](const Ev& u, const Ev& v) { return *u.pos < *v.pos; });
    std::vector<Arc> out;
    bool in[2] = {false, false};
    bool cur = false;
    const QSqrt5* start = nullptr;
    std::size_t i = 0;
    while (i < ev.size()) {
      const QSqrt5* here = ev[i].pos;
      std::size_t j = i;
      while (j < ev.size() && (ev[j].pos == here || *ev[j].pos == *here)) {
        in[ev[j].set] = ev[j].enter;
        ++j;
      }
      bool now = op(in[0], in[1]);
      if (now && !cur) start = here;
      if (!now && cur) out.push_back({*start, *here});
      cur = now;
      i = j;
    }
    CircleIntervalSet s;
    s.arcs_ = std::move(out);
    return s;
  }

  std::vector<Arc> arcs_;
};

// lambda(W symmetric-difference (W + h))
inline QSqrt5 d_W(const CircleIntervalSet& w, const QSqrt5& h) {
  if (h.frac().sign() == 0) return QSqrt5();
  auto shifted = w.translated(h);
  return w.measure() + shifted.measure() - QSqrt5(Rational(2)) * set_intersection(w, shifted).measure();
}

}  // namespace bfree
