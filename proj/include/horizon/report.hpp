#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "horizon/curve.hpp"
#include "horizon/field.hpp"
#include "horizon/flow.hpp"
#include "horizon/foliation.hpp"
#include "horizon/index.hpp"
#include "horizon/infinity.hpp"
#include "horizon/tangency.hpp"
#include "horizon/verify.hpp"

namespace horizon {

using Json = nlohmann::json;

inline constexpr const char* kSchemaVersion = "1.0";
inline constexpr const char* kArtifactVersion = "0.1.0";

/// Finite values as numbers; infinities as "inf"/"-inf" and NaN as "nan".
Json num(double v);
Json point_json(const Point& p);

Json to_json(const Spectrum2<double>& s);
Json to_json(const RegionSpectrumReport& r, std::size_t max_violations = 20);
Json to_json(const Trajectory& t);         // summary without samples
Json to_json(const LimitVerdict& v);
Json to_json(const UniquenessProbeReport& r);
Json to_json(const LeafArc& a);            // summary without points
Json to_json(const HalfReebReport& r);
Json to_json(const ConvexityProbe& p);
Json to_json(const ClosedCurve& c);
Json to_json(const TangencyReport& r);
Json to_json(const EtaSweepResult& r);
Json to_json(const IndexEstimate& e);
Json to_json(const ExtensionProbeReport& r);
Json to_json(const TransversalLadder& l);
Json to_json(const InfinityVerdict& v);
Json to_json(const ArcIntegralReport& r);
Json to_json(const FluxBatchReport& r);
Json to_json(const GreenBatchReport& r);
Json to_json(const VerticalRayReport& r);
Json to_json(const InjectivityScanReport& r);

/// Comma-separated table with a header row; numbers in shortest round-trip form.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}
    void add(const std::vector<std::string>& row);
    void add_numbers(const std::vector<double>& row);
    std::size_t rows() const { return rows_.size(); }
    std::string str() const;
    void write(const std::string& path) const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

std::string format_number(double v);

CsvTable trajectory_csv(const Trajectory& t);                 // t, x, y, r
CsvTable polyline_csv(const std::vector<Point>& pts);         // i, x, y
CsvTable tangency_points_csv(const TangencyReport& r);        // theta, x, y, class
CsvTable index_ladder_csv(const IndexEstimate& e);            // radius, flux, area
CsvTable ladder_curves_csv(const TransversalLadder& l, int samples = 256);  // rung, theta, x, y
CsvTable failing_arcs_csv(const std::vector<ArcIntegralReport>& arcs);      // arc, i, x, y, check, slack

/// Writes JSON with two-space indentation and a trailing newline.
void write_json(const std::string& path, const Json& j);

}  // namespace horizon
