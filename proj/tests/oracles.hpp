#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "horizon/field.hpp"

namespace horizon::oracle {

// Area integral of g_y over the region under a polyline down to the
// baseline, by columns. Each column finds its polyline crossings and applies
// composite Simpson in y to g_y. NaN when a column meets the polyline an
// even number of times.
inline double grid_area(const VectorField& f, const std::vector<Point>& poly, double baseline, int columns = 3000,
                        int rows = 400) {
    double lo = poly.front().x(), hi = lo;
    for (const auto& p : poly) {
        lo = std::min(lo, p.x());
        hi = std::max(hi, p.x());
    }
    const double dx = (hi - lo) / columns;
    double total = 0.0;
    for (int i = 0; i < columns; ++i) {
        const double x = lo + (i + 0.5) * dx;
        std::vector<double> ys;
        for (std::size_t k = 0; k + 1 < poly.size(); ++k) {
            const Point& a = poly[k];
            const Point& b = poly[k + 1];
            if ((a.x() < x) == (b.x() < x)) continue;
            ys.push_back(a.y() + (x - a.x()) / (b.x() - a.x()) * (b.y() - a.y()));
        }
        std::sort(ys.rbegin(), ys.rend());
        if (ys.size() % 2 == 0) return std::numeric_limits<double>::quiet_NaN();
        for (std::size_t k = 0; k < ys.size(); k += 2) {
            const double top = ys[k];
            const double bot = k + 1 < ys.size() ? ys[k + 1] : baseline;
            const double h = (top - bot) / rows;
            double s = 0.0;
            for (int j = 0; j <= rows; ++j) {
                const double w = (j == 0 || j == rows) ? 1 : (j % 2 ? 4 : 2);
                s += w * f.jacobian(Point(x, bot + j * h))(1, 1);
            }
            total += dx * s * h / 3.0;
        }
    }
    return total;
}

}  // namespace horizon::oracle
