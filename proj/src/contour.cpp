#include "horizon/contour.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

namespace horizon {

double Window::diagonal() const { return std::hypot(width(), height()); }

Window Window::scaled(double k) const {
    const Point c = center();
    const double hw = 0.5 * k * width(), hh = 0.5 * k * height();
    return {c.x() - hw, c.x() + hw, c.y() - hh, c.y() + hh};
}

double Window::min_radius() const {
    const double x = std::clamp(0.0, x0, x1), y = std::clamp(0.0, y0, y1);
    return std::hypot(x, y);
}

double Window::max_radius() const {
    return std::hypot(std::max(std::abs(x0), std::abs(x1)), std::max(std::abs(y0), std::abs(y1)));
}

namespace {

struct DisjointSets {
    std::vector<int> parent;
    explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int a) {
        while (parent[static_cast<std::size_t>(a)] != a) {
            parent[static_cast<std::size_t>(a)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(a)])];
            a = parent[static_cast<std::size_t>(a)];
        }
        return a;
    }
    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
    }
};

}  // namespace

std::vector<ContourComponent> contour_components(const std::function<double(const Point&)>& fn, double level,
                                                 const Window& window, const GridSpec& grid,
                                                 const std::function<bool(const Point&)>& valid) {
    const int nx = std::max(grid.nx, 2), ny = std::max(grid.ny, 2);
    const double dx = window.width() / (nx - 1), dy = window.height() / (ny - 1);
    auto node = [&](int i, int j) { return Point(window.x0 + i * dx, window.y0 + j * dy); };

    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> val(static_cast<std::size_t>(nx) * ny);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const Point p = node(i, j);
            val[static_cast<std::size_t>(j) * nx + i] = valid(p) ? fn(p) - level : nan;
        }
    auto v = [&](int i, int j) { return val[static_cast<std::size_t>(j) * nx + i]; };

    // Edge ids: horizontal (i,j)-(i+1,j) first, then vertical (i,j)-(i,j+1).
    const int n_h = (nx - 1) * ny;
    auto h_edge = [&](int i, int j) { return j * (nx - 1) + i; };
    auto v_edge = [&](int i, int j) { return n_h + j * nx + i; };

    std::unordered_map<int, int> vertex_of_edge;
    std::vector<Point> vertices;
    std::vector<std::vector<int>> adjacency;
    auto crossing = [&](int edge, const Point& a, const Point& b, double fa) -> int {
        auto it = vertex_of_edge.find(edge);
        if (it != vertex_of_edge.end()) return it->second;
        double lo = 0.0, hi = 1.0;
        const bool a_pos = fa >= 0.0;
        for (int k = 0; k < 60; ++k) {
            const double mid = 0.5 * (lo + hi);
            const double fm = fn(a + mid * (b - a)) - level;
            if ((fm >= 0.0) == a_pos)
                lo = mid;
            else
                hi = mid;
        }
        const int id = static_cast<int>(vertices.size());
        vertices.push_back(a + 0.5 * (lo + hi) * (b - a));
        adjacency.emplace_back();
        vertex_of_edge.emplace(edge, id);
        return id;
    };
    auto link = [&](int a, int b) {
        adjacency[static_cast<std::size_t>(a)].push_back(b);
        adjacency[static_cast<std::size_t>(b)].push_back(a);
    };

    for (int j = 0; j + 1 < ny; ++j) {
        for (int i = 0; i + 1 < nx; ++i) {
            const double c00 = v(i, j), c10 = v(i + 1, j), c11 = v(i + 1, j + 1), c01 = v(i, j + 1);
            if (std::isnan(c00) || std::isnan(c10) || std::isnan(c11) || std::isnan(c01)) continue;
            const bool s00 = c00 >= 0, s10 = c10 >= 0, s11 = c11 >= 0, s01 = c01 >= 0;
            int bottom = -1, right = -1, top = -1, left = -1;
            if (s00 != s10) bottom = crossing(h_edge(i, j), node(i, j), node(i + 1, j), c00);
            if (s10 != s11) right = crossing(v_edge(i + 1, j), node(i + 1, j), node(i + 1, j + 1), c10);
            if (s01 != s11) top = crossing(h_edge(i, j + 1), node(i, j + 1), node(i + 1, j + 1), c01);
            if (s00 != s01) left = crossing(v_edge(i, j), node(i, j), node(i, j + 1), c00);
            std::vector<int> cut;
            for (int e : {bottom, right, top, left})
                if (e >= 0) cut.push_back(e);
            if (cut.size() == 2) {
                link(cut[0], cut[1]);
            } else if (cut.size() == 4) {
                const bool center = fn(node(i, j) + 0.5 * Point(dx, dy)) - level >= 0;
                if (center == s00) {
                    link(bottom, right);
                    link(top, left);
                } else {
                    link(bottom, left);
                    link(top, right);
                }
            }
        }
    }

    const std::size_t n = vertices.size();
    DisjointSets sets(n);
    for (std::size_t a = 0; a < n; ++a)
        for (int b : adjacency[a]) sets.unite(static_cast<int>(a), b);

    // Vertices were created in cell order, so smallest-index roots give a
    // deterministic component order.
    std::vector<ContourComponent> out;
    std::vector<char> used(n, 0);
    for (std::size_t s = 0; s < n; ++s) {
        if (used[s] || sets.find(static_cast<int>(s)) != static_cast<int>(s)) continue;
        // Collect the class, then walk it from an endpoint if there is one.
        std::vector<int> members;
        for (std::size_t k = s; k < n; ++k)
            if (sets.find(static_cast<int>(k)) == static_cast<int>(s)) members.push_back(static_cast<int>(k));
        int start = members.front();
        for (int m : members)
            if (adjacency[static_cast<std::size_t>(m)].size() == 1) {
                start = m;
                break;
            }
        ContourComponent comp;
        int prev = -1, cur = start;
        while (cur >= 0 && !used[static_cast<std::size_t>(cur)]) {
            used[static_cast<std::size_t>(cur)] = 1;
            comp.points.push_back(vertices[static_cast<std::size_t>(cur)]);
            int next = -1;
            for (int b : adjacency[static_cast<std::size_t>(cur)])
                if (b != prev && !used[static_cast<std::size_t>(b)]) {
                    next = b;
                    break;
                }
            prev = cur;
            cur = next;
        }
        comp.closed = adjacency[static_cast<std::size_t>(start)].size() == 2 && comp.points.size() > 2;
        // Members missed by the walk (only possible at degenerate junctions) are appended.
        for (int m : members)
            if (!used[static_cast<std::size_t>(m)]) {
                used[static_cast<std::size_t>(m)] = 1;
                comp.points.push_back(vertices[static_cast<std::size_t>(m)]);
            }
        comp.bbox = {comp.points.front().x(), comp.points.front().x(), comp.points.front().y(), comp.points.front().y()};
        for (const auto& p : comp.points) {
            comp.bbox.x0 = std::min(comp.bbox.x0, p.x());
            comp.bbox.x1 = std::max(comp.bbox.x1, p.x());
            comp.bbox.y0 = std::min(comp.bbox.y0, p.y());
            comp.bbox.y1 = std::max(comp.bbox.y1, p.y());
        }
        out.push_back(std::move(comp));
    }
    return out;
}

}  // namespace horizon
