#include "swimfem/delaunay.hpp"

#include "swimfem/errors.hpp"
#include "swimfem/mesh.hpp"

#include <algorithm>
#include <cstdint>
#include <deque>
#include <limits>
#include <utility>

namespace swimfem {
namespace {

constexpr int kNone = -1;

inline int next3(int i) { return i == 2 ? 0 : i + 1; }
inline int prev3(int i) { return i == 0 ? 2 : i - 1; }

/// Positive when d lies strictly inside the circumcircle of the
/// counter-clockwise triangle (a, b, c).
double incircle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  const double adx = a.x() - d.x(), ady = a.y() - d.y();
  const double bdx = b.x() - d.x(), bdy = b.y() - d.y();
  const double cdx = c.x() - d.x(), cdy = c.y() - d.y();
  const double ad = adx * adx + ady * ady;
  const double bd = bdx * bdx + bdy * bdy;
  const double cd = cdx * cdx + cdy * cdy;
  return ad * (bdx * cdy - cdx * bdy) + bd * (cdx * ady - adx * cdy) + cd * (adx * bdy - bdx * ady);
}

struct Tri {
  std::array<int, 3> v{};
  std::array<int, 3> n{kNone, kNone, kNone};  // neighbour across the edge opposite v[i]
  std::array<bool, 3> c{false, false, false};  // that edge is a constraint
  bool alive = true;
  bool skip = false;
  int region = -1;
};

class ConstrainedDelaunay {
 public:
  explicit ConstrainedDelaunay(const std::vector<Vec2>& input) : n_input_(static_cast<int>(input.size())) {
    if (input.size() < 3) throw ValidationError("triangulation needs at least three points");
    p_ = input;
    Vec2 lo = input.front(), hi = input.front();
    for (const auto& q : input) {
      lo = lo.cwiseMin(q);
      hi = hi.cwiseMax(q);
    }
    scale_ = std::max((hi - lo).maxCoeff(), 1e-300);
    const Vec2 mid = 0.5 * (lo + hi);
    const double r = 20.0 * scale_;
    super_ = n_input_;
    p_.push_back(mid + Vec2(-r, -r));
    p_.push_back(mid + Vec2(r, -r));
    p_.push_back(mid + Vec2(0.0, r));
    vt_.assign(p_.size(), kNone);
    Tri t;
    t.v = {super_, super_ + 1, super_ + 2};
    add_tri(t);
  }

  void insert_input_points() {
    // Spatially coherent insertion order keeps the point-location walks short.
    std::vector<int> order(static_cast<std::size_t>(n_input_));
    for (int i = 0; i < n_input_; ++i) order[static_cast<std::size_t>(i)] = i;
    Vec2 lo = p_[0], hi = p_[0];
    for (int i = 0; i < n_input_; ++i) {
      lo = lo.cwiseMin(p_[static_cast<std::size_t>(i)]);
      hi = hi.cwiseMax(p_[static_cast<std::size_t>(i)]);
    }
    const int bins = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(n_input_) / 4.0)));
    const Vec2 ext = (hi - lo).cwiseMax(Vec2(1e-300, 1e-300));
    auto key = [&](int i) {
      const Vec2& q = p_[static_cast<std::size_t>(i)];
      int bx = std::min(bins - 1, static_cast<int>((q.x() - lo.x()) / ext.x() * bins));
      int by = std::min(bins - 1, static_cast<int>((q.y() - lo.y()) / ext.y() * bins));
      const double along = (by % 2 == 0) ? q.x() : -q.x();
      return std::pair<std::int64_t, double>(static_cast<std::int64_t>(by) * bins + (by % 2 == 0 ? bx : bins - 1 - bx),
                                             along);
    };
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return key(a) < key(b); });
    int hint = 0;
    for (int i : order) {
      const int t = insert_point(i, hint, false);
      if (t == kNone) throw ValidationError("duplicate input point in triangulation");
      hint = t;
    }
  }

  void insert_segment(int a, int b) {
    if (a == b) return;
    if (mark_constrained(a, b)) return;

    std::deque<std::pair<int, int>> crossing;
    int split = kNone;
    collect_crossings(a, b, crossing, split);
    if (split != kNone) {
      insert_segment(a, split);
      insert_segment(split, b);
      return;
    }
    std::vector<std::pair<int, int>> created;
    std::size_t guard = 0;
    const std::size_t guard_limit = 64 * (crossing.size() + 4) * (crossing.size() + 4);
    while (!crossing.empty()) {
      if (++guard > guard_limit) throw NumericalError("constraint recovery did not terminate");
      auto [u, v] = crossing.front();
      crossing.pop_front();
      auto [t1, i1] = find_edge(u, v);
      if (t1 == kNone) continue;  // already removed by an earlier flip
      const int t2 = t_[static_cast<std::size_t>(t1)].n[static_cast<std::size_t>(i1)];
      const int p = t_[static_cast<std::size_t>(t1)].v[static_cast<std::size_t>(i1)];
      const int s = opposite_vertex(t2, t1);
      if (segments_cross(p_[static_cast<std::size_t>(p)], p_[static_cast<std::size_t>(s)], p_[static_cast<std::size_t>(u)],
                         p_[static_cast<std::size_t>(v)])) {
        flip(t1, i1);
        if (s != a && s != b && p != a && p != b &&
            segments_cross(p_[static_cast<std::size_t>(p)], p_[static_cast<std::size_t>(s)], p_[static_cast<std::size_t>(a)],
                           p_[static_cast<std::size_t>(b)])) {
          crossing.emplace_back(p, s);
        } else {
          created.emplace_back(p, s);
        }
      } else {
        crossing.emplace_back(u, v);
      }
    }
    if (!mark_constrained(a, b)) throw NumericalError("constraint recovery failed");
    // Restore the Delaunay property on the new edges.
    bool flipped = true;
    int rounds = 0;
    while (flipped && rounds++ < 100) {
      flipped = false;
      for (auto& e : created) {
        auto [t, i] = find_edge(e.first, e.second);
        if (t == kNone) continue;
        if (t_[static_cast<std::size_t>(t)].c[static_cast<std::size_t>(i)]) continue;
        if (illegal(t, i)) {
          const int pv = t_[static_cast<std::size_t>(t)].v[static_cast<std::size_t>(i)];
          const int sv = opposite_vertex(t_[static_cast<std::size_t>(t)].n[static_cast<std::size_t>(i)], t);
          flip(t, i);
          e = {pv, sv};
          flipped = true;
        }
      }
    }
  }

  void mark_regions() {
    int start = kNone;
    for (int t = 0; t < num_tris(); ++t) {
      const Tri& tr = t_[static_cast<std::size_t>(t)];
      if (tr.alive && is_super(tr.v[0])) {
        start = t;
        break;
      }
      if (tr.alive && (is_super(tr.v[1]) || is_super(tr.v[2]))) {
        start = t;
        break;
      }
    }
    for (auto& tr : t_) tr.region = -1;
    std::deque<int> queue{start};
    t_[static_cast<std::size_t>(start)].region = 0;
    while (!queue.empty()) {
      const int t = queue.front();
      queue.pop_front();
      const Tri& tr = t_[static_cast<std::size_t>(t)];
      for (int i = 0; i < 3; ++i) {
        const int nb = tr.n[static_cast<std::size_t>(i)];
        if (nb == kNone) continue;
        Tri& other = t_[static_cast<std::size_t>(nb)];
        if (other.region != -1) continue;
        other.region = tr.c[static_cast<std::size_t>(i)] ? 1 - tr.region : tr.region;
        queue.push_back(nb);
      }
    }
  }

  void refine(const RefinementOptions& options) {
    std::deque<int> queue;
    for (int t = 0; t < num_tris(); ++t)
      if (t_[static_cast<std::size_t>(t)].alive && t_[static_cast<std::size_t>(t)].region == 1) queue.push_back(t);
    const std::size_t limit = options.max_points;
    while (!queue.empty()) {
      if (p_.size() >= limit) break;
      const int t = queue.front();
      queue.pop_front();
      if (!needs_refinement(t, options)) continue;
      const Tri tr = t_[static_cast<std::size_t>(t)];
      const Vec2& a = p_[static_cast<std::size_t>(tr.v[0])];
      const Vec2& b = p_[static_cast<std::size_t>(tr.v[1])];
      const Vec2& c = p_[static_cast<std::size_t>(tr.v[2])];
      std::vector<Vec2> candidates{circumcenter(a, b, c)};
      for (int i = 0; i < 3; ++i) {
        if (!tr.c[static_cast<std::size_t>(i)]) continue;
        const Vec2& e0 = p_[static_cast<std::size_t>(tr.v[static_cast<std::size_t>(next3(i))])];
        const Vec2& e1 = p_[static_cast<std::size_t>(tr.v[static_cast<std::size_t>(prev3(i))])];
        const Vec2 mid = 0.5 * (e0 + e1);
        const double len = (e1 - e0).norm();
        const double h = std::min(options.size(mid), 1.5 * len);
        // Ideal apex of an equilateral-like triangle on the constrained edge.
        candidates.push_back(mid + perp((e1 - e0) / len) * (0.8660254037844386 * h));
      }
      bool inserted = false;
      for (const Vec2& q : candidates) {
        p_.push_back(q);
        vt_.push_back(kNone);
        const int idx = static_cast<int>(p_.size()) - 1;
        std::vector<int> fresh;
        const int res = insert_point(idx, t, true, &fresh);
        if (res == kNone) {
          p_.pop_back();
          vt_.pop_back();
          continue;
        }
        for (int f : fresh) queue.push_back(f);
        inserted = true;
        break;
      }
      if (!inserted) t_[static_cast<std::size_t>(t)].skip = true;
    }
  }

  void smooth(int passes) {
    const int first_free = n_input_ + 3;
    for (int pass = 0; pass < passes; ++pass) {
      std::vector<std::vector<int>> star(p_.size());
      for (int t = 0; t < num_tris(); ++t) {
        const Tri& tr = t_[static_cast<std::size_t>(t)];
        if (!tr.alive || tr.region != 1) continue;
        for (int v : tr.v)
          if (v >= first_free) star[static_cast<std::size_t>(v)].push_back(t);
      }
      for (int v = first_free; v < static_cast<int>(p_.size()); ++v) {
        const auto& tris = star[static_cast<std::size_t>(v)];
        if (tris.empty()) continue;
        Vec2 sum = Vec2::Zero();
        int count = 0;
        double old_q = 1.0;
        for (int t : tris) {
          const Tri& tr = t_[static_cast<std::size_t>(t)];
          old_q = std::min(old_q, tri_quality(tr));
          for (int w : tr.v)
            if (w != v) {
              sum += p_[static_cast<std::size_t>(w)];
              ++count;
            }
        }
        const Vec2 old_pos = p_[static_cast<std::size_t>(v)];
        p_[static_cast<std::size_t>(v)] = sum / count;
        double new_q = 1.0;
        for (int t : tris) new_q = std::min(new_q, tri_quality(t_[static_cast<std::size_t>(t)]));
        if (!(new_q >= old_q)) p_[static_cast<std::size_t>(v)] = old_pos;
      }
      restore_delaunay(true);
    }
  }

  /// Lawson flips until every unconstrained edge is locally Delaunay.
  void restore_delaunay(bool interior_only) {
    std::vector<std::pair<int, int>> stack;
    for (int t = 0; t < num_tris(); ++t) {
      if (!t_[static_cast<std::size_t>(t)].alive) continue;
      for (int i = 0; i < 3; ++i) stack.emplace_back(t, i);
    }
    std::size_t flips = 0;
    const std::size_t limit = 50 * t_.size() + 1000;
    while (!stack.empty()) {
      auto [t, i] = stack.back();
      stack.pop_back();
      const Tri& tr = t_[static_cast<std::size_t>(t)];
      if (!tr.alive) continue;
      const int nb = tr.n[static_cast<std::size_t>(i)];
      if (nb == kNone || tr.c[static_cast<std::size_t>(i)]) continue;
      if (interior_only && tr.region != 1) continue;
      if (touches_super(t) || touches_super(nb)) continue;
      if (!illegal(t, i)) continue;
      if (++flips > limit) break;
      const int t2 = nb;
      flip(t, i);
      for (int k = 0; k < 3; ++k) {
        stack.emplace_back(t, k);
        stack.emplace_back(t2, k);
      }
    }
  }

  Triangulation extract() const {
    Triangulation out;
    std::vector<int> map(p_.size(), kNone);
    for (int i = 0; i < n_input_; ++i) {
      map[static_cast<std::size_t>(i)] = i;
      out.points.push_back(p_[static_cast<std::size_t>(i)]);
    }
    for (std::size_t i = static_cast<std::size_t>(n_input_) + 3; i < p_.size(); ++i) {
      map[i] = static_cast<int>(out.points.size());
      out.points.push_back(p_[i]);
    }
    for (const Tri& tr : t_) {
      if (!tr.alive || tr.region != 1) continue;
      out.triangles.push_back({map[static_cast<std::size_t>(tr.v[0])], map[static_cast<std::size_t>(tr.v[1])],
                               map[static_cast<std::size_t>(tr.v[2])]});
    }
    return out;
  }

 private:
  int num_tris() const { return static_cast<int>(t_.size()); }
  bool is_super(int v) const { return v >= super_ && v < super_ + 3; }
  bool touches_super(int t) const {
    const Tri& tr = t_[static_cast<std::size_t>(t)];
    return is_super(tr.v[0]) || is_super(tr.v[1]) || is_super(tr.v[2]);
  }

  double tri_quality(const Tri& tr) const {
    return triangle_quality(p_[static_cast<std::size_t>(tr.v[0])], p_[static_cast<std::size_t>(tr.v[1])],
                            p_[static_cast<std::size_t>(tr.v[2])]);
  }

  int add_tri(const Tri& t) {
    t_.push_back(t);
    const int idx = num_tris() - 1;
    for (int v : t.v) vt_[static_cast<std::size_t>(v)] = idx;
    return idx;
  }

  int index_of(int t, int v) const {
    const Tri& tr = t_[static_cast<std::size_t>(t)];
    for (int i = 0; i < 3; ++i)
      if (tr.v[static_cast<std::size_t>(i)] == v) return i;
    return kNone;
  }

  /// Vertex of `t` not shared with its neighbour `other`.
  int opposite_vertex(int t, int other) const {
    const Tri& tr = t_[static_cast<std::size_t>(t)];
    for (int i = 0; i < 3; ++i)
      if (tr.n[static_cast<std::size_t>(i)] == other) return tr.v[static_cast<std::size_t>(i)];
    throw NumericalError("broken triangle adjacency");
  }

  int back_index(int t, int other) const {
    const Tri& tr = t_[static_cast<std::size_t>(t)];
    for (int i = 0; i < 3; ++i)
      if (tr.n[static_cast<std::size_t>(i)] == other) return i;
    return kNone;
  }

  bool illegal(int t, int i) const {
    const Tri& tr = t_[static_cast<std::size_t>(t)];
    const int nb = tr.n[static_cast<std::size_t>(i)];
    const int s = opposite_vertex(nb, t);
    const Vec2& a = p_[static_cast<std::size_t>(tr.v[0])];
    const Vec2& b = p_[static_cast<std::size_t>(tr.v[1])];
    const Vec2& c = p_[static_cast<std::size_t>(tr.v[2])];
    const Vec2& d = p_[static_cast<std::size_t>(s)];
    const double l2 = std::max({(a - b).squaredNorm(), (b - c).squaredNorm(), (c - a).squaredNorm()});
    if (incircle(a, b, c, d) <= 1e-12 * l2 * l2) return false;
    // A flip must keep both triangles positively oriented.
    const Vec2& u = p_[static_cast<std::size_t>(tr.v[static_cast<std::size_t>(next3(i))])];
    const Vec2& w = p_[static_cast<std::size_t>(tr.v[static_cast<std::size_t>(prev3(i))])];
    const Vec2& pv = p_[static_cast<std::size_t>(tr.v[static_cast<std::size_t>(i)])];
    return segments_cross(pv, d, u, w);
  }

  /// Flips the edge opposite t1.v[i1]; t1 becomes (p, q, s), its neighbour (s, r, p).
  void flip(int t1, int i1) {
    Tri& a = t_[static_cast<std::size_t>(t1)];
    const int t2 = a.n[static_cast<std::size_t>(i1)];
    Tri& b = t_[static_cast<std::size_t>(t2)];
    const int j = back_index(t2, t1);
    const int p = a.v[static_cast<std::size_t>(i1)];
    const int q = a.v[static_cast<std::size_t>(next3(i1))];
    const int r = a.v[static_cast<std::size_t>(prev3(i1))];
    const int s = b.v[static_cast<std::size_t>(j)];
    // a = (p, q, r): A across (r, p) is opposite q, B across (p, q) is opposite r.
    const int nA = a.n[static_cast<std::size_t>(next3(i1))];
    const bool cA = a.c[static_cast<std::size_t>(next3(i1))];
    const int nB = a.n[static_cast<std::size_t>(prev3(i1))];
    const bool cB = a.c[static_cast<std::size_t>(prev3(i1))];
    // b = (s, r, q): C across (q, s) is opposite r, D across (s, r) is opposite q.
    const int ir = index_of(t2, r);
    const int iq = index_of(t2, q);
    const int nC = b.n[static_cast<std::size_t>(ir)];
    const bool cC = b.c[static_cast<std::size_t>(ir)];
    const int nD = b.n[static_cast<std::size_t>(iq)];
    const bool cD = b.c[static_cast<std::size_t>(iq)];

    a.v = {p, q, s};
    a.n = {nC, t2, nB};
    a.c = {cC, false, cB};
    b.v = {s, r, p};
    b.n = {nA, t1, nD};
    b.c = {cA, false, cD};
    if (nA != kNone) t_[static_cast<std::size_t>(nA)].n[static_cast<std::size_t>(back_index(nA, t1))] = t2;
    if (nC != kNone) t_[static_cast<std::size_t>(nC)].n[static_cast<std::size_t>(back_index(nC, t2))] = t1;
    for (int v : a.v) vt_[static_cast<std::size_t>(v)] = t1;
    vt_[static_cast<std::size_t>(r)] = t2;
  }

  int any_triangle_with(int v) {
    int t = vt_[static_cast<std::size_t>(v)];
    if (t != kNone && t_[static_cast<std::size_t>(t)].alive && index_of(t, v) != kNone) return t;
    for (int k = 0; k < num_tris(); ++k)
      if (t_[static_cast<std::size_t>(k)].alive && index_of(k, v) != kNone) {
        vt_[static_cast<std::size_t>(v)] = k;
        return k;
      }
    return kNone;
  }

  /// Triangle holding the edge {a, b} and the local index of the vertex
  /// opposite to it, or kNone.
  std::pair<int, int> find_edge(int a, int b) {
    const int start = any_triangle_with(a);
    if (start == kNone) return {kNone, kNone};
    for (int dir = 0; dir < 2; ++dir) {
      int t = start;
      for (int guard = 0; guard < 4096; ++guard) {
        const int k = index_of(t, a);
        const Tri& tr = t_[static_cast<std::size_t>(t)];
        if (tr.v[static_cast<std::size_t>(next3(k))] == b) return {t, prev3(k)};
        if (tr.v[static_cast<std::size_t>(prev3(k))] == b) return {t, next3(k)};
        const int nb = dir == 0 ? tr.n[static_cast<std::size_t>(prev3(k))] : tr.n[static_cast<std::size_t>(next3(k))];
        if (nb == kNone || nb == start) break;
        t = nb;
      }
    }
    return {kNone, kNone};
  }

  bool mark_constrained(int a, int b) {
    auto [t, i] = find_edge(a, b);
    if (t == kNone) return false;
    Tri& tr = t_[static_cast<std::size_t>(t)];
    tr.c[static_cast<std::size_t>(i)] = true;
    const int nb = tr.n[static_cast<std::size_t>(i)];
    if (nb != kNone) t_[static_cast<std::size_t>(nb)].c[static_cast<std::size_t>(back_index(nb, t))] = true;
    return true;
  }

  void collect_crossings(int a, int b, std::deque<std::pair<int, int>>& out, int& split) {
    const Vec2& pa = p_[static_cast<std::size_t>(a)];
    const Vec2& pb = p_[static_cast<std::size_t>(b)];
    const int start = any_triangle_with(a);
    int t = start;
    int x = kNone, y = kNone;
    // Rotate around a to find the triangle whose opposite edge is crossed by ab.
    for (int guard = 0; guard < 4096; ++guard) {
      const int k = index_of(t, a);
      const Tri& tr = t_[static_cast<std::size_t>(t)];
      const int vx = tr.v[static_cast<std::size_t>(next3(k))];
      const int vy = tr.v[static_cast<std::size_t>(prev3(k))];
      const Vec2& px = p_[static_cast<std::size_t>(vx)];
      const Vec2& py = p_[static_cast<std::size_t>(vy)];
      const double ox = orient(pa, pb, px);
      const double oy = orient(pa, pb, py);
      if (ox == 0.0 && (px - pa).dot(pb - pa) > 0.0 && (px - pa).squaredNorm() < (pb - pa).squaredNorm()) {
        split = vx;
        return;
      }
      if (ox < 0.0 && oy > 0.0 && orient(px, py, pa) * orient(px, py, pb) < 0.0) {
        x = vx;
        y = vy;
        t = tr.n[static_cast<std::size_t>(k)];
        break;
      }
      t = tr.n[static_cast<std::size_t>(prev3(k))];
      if (t == kNone || t == start) throw NumericalError("segment start not found during constraint recovery");
    }
    if (x == kNone) throw NumericalError("constraint recovery could not leave its start vertex");
    out.emplace_back(x, y);
    for (int guard = 0; guard < 1 << 20; ++guard) {
      const int w = opposite_vertex_by_edge(t, x, y);
      if (w == b) return;
      const double ow = orient(pa, pb, p_[static_cast<std::size_t>(w)]);
      if (ow == 0.0) {
        split = w;
        return;
      }
      const int prev_t = t;
      if (ow > 0.0) {
        // crossing edge is now (x, w)
        t = neighbour_across(prev_t, x, w);
        y = w;
      } else {
        t = neighbour_across(prev_t, w, y);
        x = w;
      }
      out.emplace_back(x, y);
    }
    throw NumericalError("constraint recovery walk did not terminate");
  }

  int opposite_vertex_by_edge(int t, int u, int v) const {
    const Tri& tr = t_[static_cast<std::size_t>(t)];
    for (int k : tr.v)
      if (k != u && k != v) return k;
    throw NumericalError("degenerate triangle during constraint recovery");
  }

  int neighbour_across(int t, int u, int v) const {
    const Tri& tr = t_[static_cast<std::size_t>(t)];
    for (int i = 0; i < 3; ++i) {
      const int k = tr.v[static_cast<std::size_t>(i)];
      if (k != u && k != v) return tr.n[static_cast<std::size_t>(i)];
    }
    return kNone;
  }

  /// Walks from `start` to the triangle containing q. Sets `crossed` when the
  /// walk stepped over a constraint.
  int locate(const Vec2& q, int start, bool& crossed) {
    crossed = false;
    int t = start;
    if (t == kNone || !t_[static_cast<std::size_t>(t)].alive) t = last_alive();
    const std::size_t limit = 4 * t_.size() + 64;
    for (std::size_t step = 0; step < limit; ++step) {
      const Tri& tr = t_[static_cast<std::size_t>(t)];
      bool moved = false;
      rng_ = rng_ * 1103515245u + 12345u;
      const int offset = static_cast<int>((rng_ >> 16) % 3);
      for (int k = 0; k < 3; ++k) {
        const int i = (k + offset) % 3;
        const Vec2& a = p_[static_cast<std::size_t>(tr.v[static_cast<std::size_t>(next3(i))])];
        const Vec2& b = p_[static_cast<std::size_t>(tr.v[static_cast<std::size_t>(prev3(i))])];
        if (orient(a, b, q) < 0.0) {
          const int nb = tr.n[static_cast<std::size_t>(i)];
          if (nb == kNone) return kNone;
          if (tr.c[static_cast<std::size_t>(i)]) crossed = true;
          t = nb;
          moved = true;
          break;
        }
      }
      if (!moved) return t;
    }
    for (int k = 0; k < num_tris(); ++k) {
      const Tri& tr = t_[static_cast<std::size_t>(k)];
      if (!tr.alive) continue;
      if (orient(p_[static_cast<std::size_t>(tr.v[0])], p_[static_cast<std::size_t>(tr.v[1])], q) >= 0.0 &&
          orient(p_[static_cast<std::size_t>(tr.v[1])], p_[static_cast<std::size_t>(tr.v[2])], q) >= 0.0 &&
          orient(p_[static_cast<std::size_t>(tr.v[2])], p_[static_cast<std::size_t>(tr.v[0])], q) >= 0.0) {
        crossed = true;  // unknown path; treat as not visible
        return k;
      }
    }
    return kNone;
  }

  int last_alive() const {
    for (int k = num_tris() - 1; k >= 0; --k)
      if (t_[static_cast<std::size_t>(k)].alive) return k;
    return kNone;
  }

  bool needs_refinement(int t, const RefinementOptions& options) const {
    const Tri& tr = t_[static_cast<std::size_t>(t)];
    if (!tr.alive || tr.region != 1 || tr.skip) return false;
    const Vec2& a = p_[static_cast<std::size_t>(tr.v[0])];
    const Vec2& b = p_[static_cast<std::size_t>(tr.v[1])];
    const Vec2& c = p_[static_cast<std::size_t>(tr.v[2])];
    const double la = (b - c).norm(), lb = (c - a).norm(), lc = (a - b).norm();
    const double area = 0.5 * orient(a, b, c);
    const double radius = la * lb * lc / (4.0 * area);
    const double h = options.size((a + b + c) / 3.0);
    if (radius > 0.75 * h) return true;
    const double q = triangle_quality(a, b, c);
    return q < options.min_quality && radius > 0.3 * h;
  }

  /// Bowyer-Watson insertion of point `idx`. In constrained mode the point
  /// must be visible from `hint`, inside the meshed region, and must not
  /// encroach on a constraint of its cavity. Returns a new triangle or kNone.
  int insert_point(int idx, int hint, bool constrained_mode, std::vector<int>* fresh = nullptr) {
    const Vec2 q = p_[static_cast<std::size_t>(idx)];
    bool crossed = false;
    const int t0 = locate(q, hint, crossed);
    if (t0 == kNone) return kNone;
    const Tri& base = t_[static_cast<std::size_t>(t0)];
    if (constrained_mode && (crossed || base.region != 1)) return kNone;
    double local = 0.0;
    for (int i = 0; i < 3; ++i) {
      const Vec2& a = p_[static_cast<std::size_t>(base.v[static_cast<std::size_t>(i)])];
      local = std::max(local, (a - p_[static_cast<std::size_t>(base.v[static_cast<std::size_t>(next3(i))])]).norm());
    }
    for (int v : base.v)
      if ((p_[static_cast<std::size_t>(v)] - q).norm() <= 1e-10 * std::max(local, scale_ * 1e-6)) return kNone;
    if (constrained_mode) {
      for (int v : base.v)
        if ((p_[static_cast<std::size_t>(v)] - q).norm() < 0.05 * local) return kNone;
    }

    ++stamp_;
    if (mark_.size() < t_.size()) mark_.resize(t_.size(), 0);
    std::vector<int> cavity{t0};
    mark_[static_cast<std::size_t>(t0)] = stamp_;
    struct BoundaryEdgeRef {
      int a, b, outer;
      bool constrained;
    };
    std::vector<BoundaryEdgeRef> rim;
    for (std::size_t k = 0; k < cavity.size(); ++k) {
      const int t = cavity[k];
      const Tri tr = t_[static_cast<std::size_t>(t)];
      for (int i = 0; i < 3; ++i) {
        const int nb = tr.n[static_cast<std::size_t>(i)];
        const int ea = tr.v[static_cast<std::size_t>(next3(i))];
        const int eb = tr.v[static_cast<std::size_t>(prev3(i))];
        if (nb != kNone && mark_[static_cast<std::size_t>(nb)] == stamp_) continue;
        bool grow = false;
        if (nb != kNone && !tr.c[static_cast<std::size_t>(i)]) {
          const Tri& o = t_[static_cast<std::size_t>(nb)];
          grow = incircle(p_[static_cast<std::size_t>(o.v[0])], p_[static_cast<std::size_t>(o.v[1])],
                          p_[static_cast<std::size_t>(o.v[2])], q) > 0.0;
        }
        if (grow) {
          mark_[static_cast<std::size_t>(nb)] = stamp_;
          cavity.push_back(nb);
        } else {
          rim.push_back({ea, eb, nb, tr.c[static_cast<std::size_t>(i)]});
        }
      }
    }
    // Edges of the rim that are shared by two cavity triangles cannot occur
    // since marked neighbours are skipped; check star-shapedness.
    for (const auto& e : rim) {
      const Vec2& a = p_[static_cast<std::size_t>(e.a)];
      const Vec2& b = p_[static_cast<std::size_t>(e.b)];
      if (orient(a, b, q) <= 1e-14 * (b - a).squaredNorm()) return kNone;
      if (constrained_mode && e.constrained) {
        const Vec2 mid = 0.5 * (a + b);
        if ((q - mid).norm() < 0.5 * (b - a).norm() * 1.05) return kNone;
      }
    }

    const int region = base.region;
    for (int t : cavity) t_[static_cast<std::size_t>(t)].alive = false;
    const int first = num_tris();
    for (const auto& e : rim) {
      Tri nt;
      nt.v = {e.a, e.b, idx};
      nt.n[2] = e.outer;
      nt.c[2] = e.constrained;
      nt.region = region;
      const int id = add_tri(nt);
      if (e.outer != kNone) {
        Tri& o = t_[static_cast<std::size_t>(e.outer)];
        for (int i = 0; i < 3; ++i) {
          const int ov = o.v[static_cast<std::size_t>(i)];
          if (ov != e.a && ov != e.b) o.n[static_cast<std::size_t>(i)] = id;
        }
      }
    }
    const int count = num_tris() - first;
    for (int k = 0; k < count; ++k) {
      Tri& tr = t_[static_cast<std::size_t>(first + k)];
      for (int m = 0; m < count; ++m) {
        if (m == k) continue;
        const Tri& other = t_[static_cast<std::size_t>(first + m)];
        if (other.v[0] == tr.v[1]) tr.n[0] = first + m;  // edge (b, p) opposite a
        if (other.v[1] == tr.v[0]) tr.n[1] = first + m;  // edge (p, a) opposite b
      }
    }
    if (fresh) {
      fresh->clear();
      for (int k = 0; k < count; ++k) fresh->push_back(first + k);
    }
    return first;
  }

  int n_input_;
  int super_ = 0;
  double scale_ = 1.0;
  std::vector<Vec2> p_;
  std::vector<Tri> t_;
  std::vector<int> vt_;
  std::vector<int> mark_;
  int stamp_ = 0;
  unsigned rng_ = 12345u;
};

}  // namespace

Triangulation triangulate(const PlanarStraightLineGraph& graph, const RefinementOptions& options) {
  ConstrainedDelaunay cdt(graph.points);
  cdt.insert_input_points();
  for (const auto& s : graph.segments) cdt.insert_segment(s[0], s[1]);
  cdt.mark_regions();
  if (options.size) {
    cdt.refine(options);
    cdt.smooth(options.smoothing_passes);
  }
  return cdt.extract();
}

}  // namespace swimfem
