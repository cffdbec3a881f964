#pragma once
#include <string>
#include <vector>

#include "json.hpp"

namespace wlab {

using json = nlohmann::json;

// Where the right-hand side of a check comes from.
enum class BoundSource {
    Theory,       // explicit constant from the theory
    Measured,     // measured quantity (reference run, fitted constant, budget)
    Exact,        // closed-form value
    Descriptive,  // reported only, never fails
};

const char* to_string(BoundSource s);

struct CaseRecord {
    std::string name;
    json params = json::object();
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio = 0.0;
    double tolerance = 0.0;  // relative slack on rhs
    double budget = 0.0;     // absolute quadrature / Monte Carlo budget added to rhs
    bool pass = false;
    bool marginal = false;  // passed with a margin below its budget
    BoundSource source = BoundSource::Measured;
    std::string note;
};

struct SeriesPoint {
    std::string series;
    double x = 0.0;
    double y = 0.0;
};

class SuiteReport {
public:
    std::string suite;
    json environment = json::object();
    json summary = json::object();
    std::vector<CaseRecord> cases;
    std::vector<SeriesPoint> series;

    SuiteReport() = default;
    explicit SuiteReport(std::string name) : suite(std::move(name)) {}

    // lhs <= rhs (1 + tol) + budget; marginal when the margin rhs (1 + tol) - lhs is below the budget
    CaseRecord& check_le(std::string name, json params, double lhs, double rhs, double tol, double budget, BoundSource src);
    // lhs >= rhs (1 - tol) - budget; ratio = rhs / lhs so that passing ratios stay <= 1
    CaseRecord& check_ge(std::string name, json params, double lhs, double rhs, double tol, double budget, BoundSource src);
    // |lhs - rhs| <= tol |rhs| + budget
    CaseRecord& check_close(std::string name, json params, double lhs, double rhs, double tol, double budget, BoundSource src);
    // a boolean property; lhs and rhs are informative
    CaseRecord& check_true(std::string name, json params, bool ok, double lhs, double rhs, BoundSource src);
    CaseRecord& describe(std::string name, json params, double lhs, double rhs);
    void add_point(const std::string& s, double x, double y) { series.push_back({s, x, y}); }

    // appends cases and series; summaries are nested under the other suite's name
    void merge(const SuiteReport& other);

    bool passed() const { return failures() == 0; }
    int failures() const;
    int marginal_count() const;
    double max_ratio() const;

    json to_json() const;
    std::string dump() const { return to_json().dump(2); }
    // plot-ready rows: case, x, y
    std::string to_csv() const;
};

// finite numbers as numbers, the rest as the strings "inf", "-inf", "nan"
json number(double v);

}  // namespace wlab
