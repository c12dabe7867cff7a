#include "maxperc/lattice.hpp"

#include <algorithm>

namespace maxperc {

std::string to_string(Node n) {
    return "(" + std::to_string(n.x) + "," + std::to_string(n.y) + ")";
}

std::string to_string(Edge e) {
    return to_string(e.origin) + (e.dir == Dir::East ? "E" : "N");
}

std::size_t Bitset::count() const {
    std::size_t c = 0;
    for (std::uint64_t w : w_) c += static_cast<std::size_t>(__builtin_popcountll(w));
    return c;
}

bool Bitset::any() const {
    for (std::uint64_t w : w_)
        if (w) return true;
    return false;
}

bool Bitset::intersects(const Bitset& o) const {
    std::size_t n = std::min(w_.size(), o.w_.size());
    for (std::size_t i = 0; i < n; ++i)
        if (w_[i] & o.w_[i]) return true;
    return false;
}

std::size_t Bitset::and_count(const Bitset& a, const Bitset& b) {
    std::size_t n = std::min(a.w_.size(), b.w_.size());
    std::size_t c = 0;
    for (std::size_t i = 0; i < n; ++i)
        c += static_cast<std::size_t>(__builtin_popcountll(a.w_[i] & b.w_[i]));
    return c;
}

bool Bitset::is_subset_of(const Bitset& o) const {
    if (n_ != o.n_) return false;
    for (std::size_t i = 0; i < w_.size(); ++i)
        if (w_[i] & ~o.w_[i]) return false;
    return true;
}

Bitset& Bitset::operator|=(const Bitset& o) {
    for (std::size_t i = 0; i < w_.size(); ++i) w_[i] |= o.w_[i];
    return *this;
}

Bitset& Bitset::operator&=(const Bitset& o) {
    for (std::size_t i = 0; i < w_.size(); ++i) w_[i] &= o.w_[i];
    return *this;
}

Window::Window(Node lo, Node hi) : lo_(lo), hi_(hi) {
    if (lo.x > hi.x || lo.y > hi.y)
        throw std::invalid_argument("window corners out of order: " +
                                    to_string(lo) + " > " + to_string(hi));
    width_ = hi.x - lo.x + 1;
    height_ = hi.y - lo.y + 1;
}

Window Window::centered(int side) {
    if (side < 1) throw std::invalid_argument("window side must be >= 1");
    int lo = -((side - 1) / 2);
    return Window(Node{lo, lo}, Node{lo + side - 1, lo + side - 1});
}

Window Window::box(int n) {
    if (n < 0) throw std::invalid_argument("box radius must be >= 0");
    return Window(Node{-n, -n}, Node{n, n});
}

std::size_t Window::node_index(Node n) const {
    if (!contains(n))
        throw std::out_of_range("node " + to_string(n) + " outside window " +
                                describe());
    return static_cast<std::size_t>(n.y - lo_.y) * width_ + (n.x - lo_.x);
}

Node Window::node_at(std::size_t idx) const {
    return Node{lo_.x + static_cast<int>(idx % width_),
                lo_.y + static_cast<int>(idx / width_)};
}

std::size_t Window::edge_index(Edge e) const {
    if (!contains(e))
        throw std::out_of_range("edge " + to_string(e) + " outside window " +
                                describe());
    Node o = e.origin;
    if (e.dir == Dir::East)
        return static_cast<std::size_t>(o.y - lo_.y) * (width_ - 1) +
               (o.x - lo_.x);
    return east_count() +
           static_cast<std::size_t>(o.y - lo_.y) * width_ + (o.x - lo_.x);
}

Edge Window::edge_at(std::size_t idx) const {
    if (idx < east_count()) {
        int ew = width_ - 1;
        return Edge{Node{lo_.x + static_cast<int>(idx % ew),
                         lo_.y + static_cast<int>(idx / ew)},
                    Dir::East};
    }
    std::size_t k = idx - east_count();
    return Edge{Node{lo_.x + static_cast<int>(k % width_),
                     lo_.y + static_cast<int>(k / width_)},
                Dir::North};
}

EdgeMask Window::full_edge_mask() const { return EdgeMask(edge_count(), true); }

std::string Window::describe() const {
    return "[" + std::to_string(lo_.x) + "," + std::to_string(hi_.x) + "]x[" +
           std::to_string(lo_.y) + "," + std::to_string(hi_.y) + "]";
}

namespace {

// In-edges of i that exist in the window, paired with the parent node.
inline int in_edges(const Window& w, Node i, Edge out[2], Node parent[2]) {
    int n = 0;
    if (i.x > w.lo().x) {
        parent[n] = Node{i.x - 1, i.y};
        out[n] = Edge{parent[n], Dir::East};
        ++n;
    }
    if (i.y > w.lo().y) {
        parent[n] = Node{i.x, i.y - 1};
        out[n] = Edge{parent[n], Dir::North};
        ++n;
    }
    return n;
}

inline int out_edges(const Window& w, Node i, Edge out[2], Node child[2]) {
    int n = 0;
    if (i.x < w.hi().x) {
        child[n] = Node{i.x + 1, i.y};
        out[n++] = Edge{i, Dir::East};
    }
    if (i.y < w.hi().y) {
        child[n] = Node{i.x, i.y + 1};
        out[n++] = Edge{i, Dir::North};
    }
    return n;
}

}  // namespace

std::vector<Node> parents(const Window& w, Node i, const EdgeMask& open) {
    w.node_index(i);  // range check
    Edge e[2];
    Node p[2];
    int n = in_edges(w, i, e, p);
    std::vector<Node> result;
    for (int k = 0; k < n; ++k)
        if (open.test(w.edge_index(e[k]))) result.push_back(p[k]);
    std::sort(result.begin(), result.end());
    return result;
}

std::vector<Node> children(const Window& w, Node i, const EdgeMask& open) {
    w.node_index(i);
    Edge e[2];
    Node c[2];
    int n = out_edges(w, i, e, c);
    std::vector<Node> result;
    for (int k = 0; k < n; ++k)
        if (open.test(w.edge_index(e[k]))) result.push_back(c[k]);
    std::sort(result.begin(), result.end());
    return result;
}

namespace {

// Shared BFS over in- or out-edges with a visited bitset.
NodeMask reach_mask(const Window& w, Node start, const EdgeMask& open,
                    bool include_self, bool backward) {
    std::size_t s = w.node_index(start);
    NodeMask visited(w.node_count());
    visited.set(s);
    std::vector<std::size_t> frontier{s}, next;
    Edge e[2];
    Node nb[2];
    while (!frontier.empty()) {
        next.clear();
        for (std::size_t idx : frontier) {
            Node cur = w.node_at(idx);
            int n = backward ? in_edges(w, cur, e, nb) : out_edges(w, cur, e, nb);
            for (int k = 0; k < n; ++k) {
                if (!open.test(w.edge_index(e[k]))) continue;
                std::size_t t = w.node_index(nb[k]);
                if (!visited.test(t)) {
                    visited.set(t);
                    next.push_back(t);
                }
            }
        }
        frontier.swap(next);
    }
    if (!include_self) visited.set(s, false);
    return visited;
}

}  // namespace

NodeMask ancestor_mask(const Window& w, Node i, const EdgeMask& open,
                       bool include_self) {
    return reach_mask(w, i, open, include_self, /*backward=*/true);
}

NodeMask descendant_mask(const Window& w, Node i, const EdgeMask& open,
                         bool include_self) {
    return reach_mask(w, i, open, include_self, /*backward=*/false);
}

std::vector<Node> mask_to_nodes(const Window& w, const NodeMask& m) {
    std::vector<Node> nodes;
    nodes.reserve(m.count());
    m.for_each_set([&](std::size_t idx) { nodes.push_back(w.node_at(idx)); });
    return nodes;
}

std::vector<Node> ancestors(const Window& w, Node i, const EdgeMask& open) {
    return mask_to_nodes(w, ancestor_mask(w, i, open, false));
}

std::vector<Node> ancestors_closed(const Window& w, Node i,
                                   const EdgeMask& open) {
    return mask_to_nodes(w, ancestor_mask(w, i, open, true));
}

std::vector<Node> descendants(const Window& w, Node i, const EdgeMask& open) {
    return mask_to_nodes(w, descendant_mask(w, i, open, false));
}

std::vector<Node> descendants_closed(const Window& w, Node i,
                                     const EdgeMask& open) {
    return mask_to_nodes(w, descendant_mask(w, i, open, true));
}

AncestorClosure::AncestorClosure(const Window& w)
    : window_(w), masks_(w.node_count(), NodeMask(w.node_count())) {}

void AncestorClosure::recompute(const EdgeMask& open) {
    // Row-major node order is topological, so parent masks are final when
    // a node is processed.
    Edge e[2];
    Node p[2];
    for (std::size_t idx = 0; idx < window_.node_count(); ++idx) {
        NodeMask& m = masks_[idx];
        m.reset();
        m.set(idx);
        Node cur = window_.node_at(idx);
        int n = in_edges(window_, cur, e, p);
        for (int k = 0; k < n; ++k)
            if (open.test(window_.edge_index(e[k])))
                m |= masks_[window_.node_index(p[k])];
    }
}

}  // namespace maxperc
