#pragma once

#include <string>
#include <vector>

#include "gsv/graph.hpp"
#include "gsv/signal.hpp"

namespace gsv {

struct RegionRecord {
    std::string id;
    std::string label;
    double lat = 0.0;
    double lon = 0.0;
    double population = 0.0;
};

/// Region x date cumulative confirmed counts, dates ascending.
struct CaseTable {
    std::vector<RegionRecord> regions;
    std::vector<std::string> dates; // ISO-8601
    Eigen::MatrixXd confirmed;
};

struct IngestOptions {
    bool repair = false; // clamp non-monotone cumulative counts instead of failing
};

/// Loads `regions.csv` (id,label,lat,lon,population) and `cases.csv`
/// (region_id,date,confirmed). Missing (region, date) entries carry the
/// previous cumulative value forward (0 before the first report).
CaseTable ingest_cases(const std::string& regions_csv, const std::string& cases_csv,
                       const IngestOptions& opts = {});

double haversine_km(double lat1, double lon1, double lat2, double lon2);

struct GeoGraphConfig {
    double threshold_km = 100.0;
    double sigma_km = 0.0; // 0 = threshold_km
    bool planar = false;   // equirectangular approximation instead of great-circle
};

/// Distance-threshold graph over region headquarters with Gaussian kernel
/// weights; nodes carry lat/lon coordinates and region labels.
Graph build_geo_graph(const std::vector<RegionRecord>& regions,
                      const GeoGraphConfig& cfg = {});

/// X[i][t] = confirmed[i][t] / population[i]; `daily` switches to first
/// differences of the cumulative counts (first day keeps its value).
SignalSeries normalize_signal(const CaseTable& cases, bool daily = false);

/// Lossless re-export in the cases.csv layout.
void export_case_table(const CaseTable& table, const std::string& path);

} // namespace gsv
