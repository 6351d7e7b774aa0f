#include "gsv/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "gsv/csv.hpp"

namespace gsv {

namespace {
constexpr double kEarthRadiusKm = 6371.0088; // mean Earth radius
constexpr double kDegToRad = 3.14159265358979323846 / 180.0;
} // namespace

double haversine_km(double lat1, double lon1, double lat2, double lon2) {
    const double p1 = lat1 * kDegToRad, p2 = lat2 * kDegToRad;
    const double dp = (lat2 - lat1) * kDegToRad;
    const double dl = (lon2 - lon1) * kDegToRad;
    const double a = std::sin(dp / 2) * std::sin(dp / 2) +
                     std::cos(p1) * std::cos(p2) * std::sin(dl / 2) * std::sin(dl / 2);
    return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(a)));
}

namespace {

double planar_km(double lat1, double lon1, double lat2, double lon2) {
    // equirectangular: treat lat/lon as planar axes scaled at the mean latitude
    const double mean_lat = 0.5 * (lat1 + lat2) * kDegToRad;
    const double dx = (lon2 - lon1) * kDegToRad * std::cos(mean_lat) * kEarthRadiusKm;
    const double dy = (lat2 - lat1) * kDegToRad * kEarthRadiusKm;
    return std::sqrt(dx * dx + dy * dy);
}

void validate_region(const RegionRecord& r) {
    if (r.id.empty()) throw IngestError("region with empty id");
    if (!(r.population > 0)) throw IngestError("region " + r.id + ": population must be positive");
    if (std::abs(r.lat) > 90) throw IngestError("region " + r.id + ": |lat| must be <= 90");
    if (std::abs(r.lon) > 180) throw IngestError("region " + r.id + ": |lon| must be <= 180");
}

bool valid_iso_date(const std::string& d) {
    if (d.size() != 10 || d[4] != '-' || d[7] != '-') return false;
    for (size_t k : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u})
        if (!std::isdigit(static_cast<unsigned char>(d[k]))) return false;
    return true;
}

} // namespace

CaseTable ingest_cases(const std::string& regions_csv, const std::string& cases_csv,
                       const IngestOptions& opts) {
    auto regions_table = csv::read_file(regions_csv);
    if (regions_table.header != std::vector<std::string>{"id", "label", "lat", "lon", "population"})
        throw IngestError("unexpected header in " + regions_csv);

    CaseTable out;
    std::map<std::string, int> region_index;
    for (const auto& row : regions_table.rows) {
        RegionRecord r;
        r.id = row[0];
        r.label = row[1];
        r.lat = csv::parse_double(row[2], regions_csv);
        r.lon = csv::parse_double(row[3], regions_csv);
        r.population = csv::parse_double(row[4], regions_csv);
        validate_region(r);
        if (!region_index.emplace(r.id, static_cast<int>(out.regions.size())).second)
            throw IngestError("duplicate region id " + r.id + " in " + regions_csv);
        out.regions.push_back(std::move(r));
    }

    auto cases_table = csv::read_file(cases_csv);
    if (cases_table.header != std::vector<std::string>{"region_id", "date", "confirmed"})
        throw IngestError("unexpected header in " + cases_csv);

    std::vector<std::string> dates;
    for (const auto& row : cases_table.rows) {
        if (!valid_iso_date(row[1]))
            throw IngestError("bad ISO date '" + row[1] + "' in " + cases_csv);
        dates.push_back(row[1]);
    }
    std::sort(dates.begin(), dates.end());
    dates.erase(std::unique(dates.begin(), dates.end()), dates.end());
    std::map<std::string, int> date_index;
    for (size_t k = 0; k < dates.size(); ++k) date_index[dates[k]] = static_cast<int>(k);
    out.dates = std::move(dates);

    const int nr = static_cast<int>(out.regions.size());
    const int nd = static_cast<int>(out.dates.size());
    Eigen::MatrixXd raw = Eigen::MatrixXd::Constant(nr, nd, -1.0); // -1 = missing
    for (size_t k = 0; k < cases_table.rows.size(); ++k) {
        const auto& row = cases_table.rows[k];
        auto it = region_index.find(row[0]);
        if (it == region_index.end())
            throw IngestError("unknown region id '" + row[0] + "' at data row " +
                              std::to_string(k + 1) + " of " + cases_csv);
        const double v = csv::parse_double(row[2], cases_csv);
        if (v < 0)
            throw IngestError("negative confirmed count at data row " + std::to_string(k + 1));
        raw(it->second, date_index[row[1]]) = v;
    }

    out.confirmed.resize(nr, nd);
    for (int i = 0; i < nr; ++i) {
        double prev = 0.0;
        for (int t = 0; t < nd; ++t) {
            double v = raw(i, t);
            if (v < 0) v = prev; // missing entry: carry the cumulative value forward
            if (v < prev) {
                if (opts.repair) {
                    v = prev;
                } else {
                    throw IngestError("non-monotone cumulative count for region " +
                                      out.regions[i].id + " on " + out.dates[t] +
                                      " (" + csv::format_double(raw(i, t)) + " after " +
                                      csv::format_double(prev) +
                                      "); rerun with repair to clamp");
                }
            }
            out.confirmed(i, t) = v;
            prev = v;
        }
    }
    return out;
}

Graph build_geo_graph(const std::vector<RegionRecord>& regions, const GeoGraphConfig& cfg) {
    if (!(cfg.threshold_km > 0)) throw ConfigError("distance threshold must be positive");
    const double sigma = cfg.sigma_km > 0 ? cfg.sigma_km : cfg.threshold_km;
    const double sigma2 = sigma * sigma;
    const int n = static_cast<int>(regions.size());
    for (const auto& r : regions) validate_region(r);

    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double d = cfg.planar
                                 ? planar_km(regions[i].lat, regions[i].lon, regions[j].lat,
                                             regions[j].lon)
                                 : haversine_km(regions[i].lat, regions[i].lon,
                                                regions[j].lat, regions[j].lon);
            if (d <= cfg.threshold_km) {
                const double v = std::exp(-d * d / sigma2);
                w(i, j) = w(j, i) = v;
            }
        }
    }
    Eigen::MatrixX2d coords(n, 2);
    std::vector<std::string> labels(n);
    for (int i = 0; i < n; ++i) {
        coords(i, 0) = regions[i].lat;
        coords(i, 1) = regions[i].lon;
        labels[i] = regions[i].label;
    }
    return Graph(std::move(w), std::move(coords), CoordKind::Geographic, std::move(labels));
}

SignalSeries normalize_signal(const CaseTable& cases, bool daily) {
    const int nr = static_cast<int>(cases.regions.size());
    const int nd = static_cast<int>(cases.dates.size());
    SignalSeries out;
    out.values.resize(nr, nd);
    for (int i = 0; i < nr; ++i) {
        const double pop = cases.regions[i].population;
        for (int t = 0; t < nd; ++t) {
            double v = cases.confirmed(i, t);
            if (daily && t > 0) v -= cases.confirmed(i, t - 1);
            out.values(i, t) = v / pop;
        }
    }
    out.time_axis.resize(nd);
    for (int t = 0; t < nd; ++t) out.time_axis[t] = 1.0 + t;
    return out;
}

void export_case_table(const CaseTable& table, const std::string& path) {
    std::ostringstream out;
    out << "region_id,date,confirmed\n";
    for (size_t i = 0; i < table.regions.size(); ++i)
        for (size_t t = 0; t < table.dates.size(); ++t)
            out << csv::quote(table.regions[i].id) << ',' << table.dates[t] << ','
                << csv::format_double(table.confirmed(static_cast<int>(i), static_cast<int>(t)))
                << '\n';
    csv::atomic_write(path, out.str());
}

} // namespace gsv
