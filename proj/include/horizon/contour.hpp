#pragma once

#include <functional>
#include <vector>

#include <Eigen/Core>

namespace horizon {

using Point = Eigen::Vector2d;

/// Axis-aligned rectangle [x0,x1] x [y0,y1].
struct Window {
    double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;

    bool contains(const Point& p) const { return p.x() >= x0 && p.x() <= x1 && p.y() >= y0 && p.y() <= y1; }
    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
    double diagonal() const;
    Point center() const { return {0.5 * (x0 + x1), 0.5 * (y0 + y1)}; }
    /// Same center, sides multiplied by k.
    Window scaled(double k) const;
    /// Distance from the origin to the nearest point of the rectangle.
    double min_radius() const;
    double max_radius() const;
};

struct GridSpec {
    int nx = 257;
    int ny = 257;
    GridSpec refined() const { return {2 * nx - 1, 2 * ny - 1}; }
};

struct BoundingBox {
    double x0, x1, y0, y1;
};

/// One connected piece of {F = level}. Points are ordered along the curve.
struct ContourComponent {
    std::vector<Point> points;
    bool closed = false;
    BoundingBox bbox{0, 0, 0, 0};
};

/// Marching squares on a uniform grid over `window`. Nodes where `valid` is
/// false are removed together with every cell touching them. Edge crossings
/// are refined by bisection on F; saddle cells are resolved by the value of F
/// at the cell center. Components are the connected classes of the resulting
/// segment graph, listed in order of their first grid cell.
std::vector<ContourComponent> contour_components(const std::function<double(const Point&)>& fn, double level,
                                                 const Window& window, const GridSpec& grid,
                                                 const std::function<bool(const Point&)>& valid);

}  // namespace horizon
