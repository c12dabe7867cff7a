#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace maxperc {

// A lattice point i = (i1, i2) of the oriented square lattice.
struct Node {
    int x = 0;
    int y = 0;

    friend bool operator==(Node a, Node b) { return a.x == b.x && a.y == b.y; }
    friend bool operator!=(Node a, Node b) { return !(a == b); }
    // (x, y)-lexicographic; used for deterministic tie-breaking.
    friend bool operator<(Node a, Node b) {
        return a.x != b.x ? a.x < b.x : a.y < b.y;
    }
};

std::string to_string(Node n);

// Graph distance |i1-j1| + |i2-j2|.
inline int delta(Node i, Node j) {
    int dx = i.x - j.x;
    int dy = i.y - j.y;
    return (dx < 0 ? -dx : dx) + (dy < 0 ? -dy : dy);
}

// All edges point toward increasing coordinates: East = +x, North = +y.
enum class Dir : std::uint8_t { East = 0, North = 1 };

struct Edge {
    Node origin;
    Dir dir = Dir::East;

    Node target() const {
        return dir == Dir::East ? Node{origin.x + 1, origin.y}
                                : Node{origin.x, origin.y + 1};
    }
    friend bool operator==(Edge a, Edge b) {
        return a.origin == b.origin && a.dir == b.dir;
    }
};

std::string to_string(Edge e);

// Dynamic bitset used for node sets and edge sets over a window.
class Bitset {
public:
    Bitset() = default;
    explicit Bitset(std::size_t n, bool value = false)
        : n_(n), w_((n + 63) / 64, value ? ~std::uint64_t{0} : 0) {
        trim();
    }

    std::size_t size() const { return n_; }

    bool test(std::size_t i) const { return (w_[i >> 6] >> (i & 63)) & 1u; }

    void set(std::size_t i, bool value = true) {
        std::uint64_t bit = std::uint64_t{1} << (i & 63);
        if (value)
            w_[i >> 6] |= bit;
        else
            w_[i >> 6] &= ~bit;
    }

    void reset() { w_.assign(w_.size(), 0); }

    std::size_t count() const;
    bool any() const;
    bool none() const { return !any(); }

    bool intersects(const Bitset& o) const;
    bool is_subset_of(const Bitset& o) const;
    static std::size_t and_count(const Bitset& a, const Bitset& b);

    Bitset& operator|=(const Bitset& o);
    Bitset& operator&=(const Bitset& o);

    friend bool operator==(const Bitset& a, const Bitset& b) {
        return a.n_ == b.n_ && a.w_ == b.w_;
    }

    template <class F>
    void for_each_set(F&& f) const {
        for (std::size_t wi = 0; wi < w_.size(); ++wi) {
            std::uint64_t w = w_[wi];
            while (w) {
                unsigned bit = static_cast<unsigned>(__builtin_ctzll(w));
                f(wi * 64 + bit);
                w &= w - 1;
            }
        }
    }

private:
    void trim() {
        if (n_ & 63) w_.back() &= (~std::uint64_t{0}) >> (64 - (n_ & 63));
    }

    std::size_t n_ = 0;
    std::vector<std::uint64_t> w_;
};

using NodeMask = Bitset;
using EdgeMask = Bitset;

// A finite rectangular window of the lattice. Nodes are all lattice points
// inside the rectangle; edges are the oriented bonds with both endpoints
// inside. Nodes and edges carry dense indices for bitset storage.
//
// Node indices run row-major (y, then x), which is a topological order of
// the oriented lattice: both parents of a node have strictly smaller index.
class Window {
public:
    Window(Node lo, Node hi);

    // Square window of `side` x `side` nodes centered at the origin
    // (lo = -((side-1)/2)); side=2 gives [0,1]^2, side=61 gives [-30,30]^2.
    static Window centered(int side);
    // The box B(n) = [-n, n]^2.
    static Window box(int n);

    Node lo() const { return lo_; }
    Node hi() const { return hi_; }
    int width() const { return width_; }
    int height() const { return height_; }

    std::size_t node_count() const {
        return static_cast<std::size_t>(width_) * height_;
    }
    std::size_t east_count() const {
        return static_cast<std::size_t>(width_ - 1) * height_;
    }
    std::size_t north_count() const {
        return static_cast<std::size_t>(width_) * (height_ - 1);
    }
    std::size_t edge_count() const { return east_count() + north_count(); }

    bool contains(Node n) const {
        return n.x >= lo_.x && n.x <= hi_.x && n.y >= lo_.y && n.y <= hi_.y;
    }
    bool contains(Edge e) const {
        return contains(e.origin) && contains(e.target());
    }

    std::size_t node_index(Node n) const;  // throws std::out_of_range
    Node node_at(std::size_t idx) const;

    std::size_t edge_index(Edge e) const;  // throws std::out_of_range
    Edge edge_at(std::size_t idx) const;

    // Every lattice edge of the window marked present.
    EdgeMask full_edge_mask() const;

    template <class F>
    void for_each_node(F&& f) const {
        for (int y = lo_.y; y <= hi_.y; ++y)
            for (int x = lo_.x; x <= hi_.x; ++x) f(Node{x, y});
    }

    template <class F>
    void for_each_edge(F&& f) const {
        for (std::size_t i = 0; i < edge_count(); ++i) f(edge_at(i));
    }

    friend bool operator==(const Window& a, const Window& b) {
        return a.lo_ == b.lo_ && a.hi_ == b.hi_;
    }
    friend bool operator!=(const Window& a, const Window& b) {
        return !(a == b);
    }

    std::string describe() const;

private:
    Node lo_, hi_;
    int width_ = 0, height_ = 0;
};

// Parents of i whose connecting edge is present in `open`; subset of
// {(x-1,y), (x,y-1)}.
std::vector<Node> parents(const Window& w, Node i, const EdgeMask& open);
// Children of i along present edges; subset of {(x+1,y), (x,y+1)}.
std::vector<Node> children(const Window& w, Node i, const EdgeMask& open);

// Backward reachability an(i) over present edges, restricted to the window.
// With include_self the result is An(i) = {i} u an(i).
NodeMask ancestor_mask(const Window& w, Node i, const EdgeMask& open,
                       bool include_self = false);
// Forward reachability de(i) / De(i).
NodeMask descendant_mask(const Window& w, Node i, const EdgeMask& open,
                         bool include_self = false);

std::vector<Node> ancestors(const Window& w, Node i, const EdgeMask& open);
std::vector<Node> ancestors_closed(const Window& w, Node i,
                                   const EdgeMask& open);
std::vector<Node> descendants(const Window& w, Node i, const EdgeMask& open);
std::vector<Node> descendants_closed(const Window& w, Node i,
                                     const EdgeMask& open);

std::vector<Node> mask_to_nodes(const Window& w, const NodeMask& m);

// Closed ancestor masks An(i) for every node of the window, built by one
// sweep in topological order. Opt-in transitive closure for the exhaustive
// oracle and box statistics; reusable across configurations.
class AncestorClosure {
public:
    explicit AncestorClosure(const Window& w);

    void recompute(const EdgeMask& open);

    const NodeMask& closed_ancestors(std::size_t node_idx) const {
        return masks_[node_idx];
    }
    const NodeMask& closed_ancestors(Node i) const {
        return masks_[window_.node_index(i)];
    }

private:
    Window window_;
    std::vector<NodeMask> masks_;
};

}  // namespace maxperc
