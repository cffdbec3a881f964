#include "wlab/report.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace wlab {

const char* to_string(BoundSource s) {
    switch (s) {
        case BoundSource::Theory: return "theory-constant";
        case BoundSource::Measured: return "measured";
        case BoundSource::Exact: return "exact";
        case BoundSource::Descriptive: return "descriptive";
    }
    return "unknown";
}

json number(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

namespace {
double safe_ratio(double lhs, double rhs) {
    if (rhs != 0.0) return lhs / rhs;
    return lhs == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
}

CaseRecord make(std::string name, json params, double lhs, double rhs, double tol, double budget, BoundSource src) {
    CaseRecord c;
    c.name = std::move(name);
    c.params = std::move(params);
    c.lhs = lhs;
    c.rhs = rhs;
    c.ratio = safe_ratio(lhs, rhs);
    c.tolerance = tol;
    c.budget = budget;
    c.source = src;
    return c;
}
}  // namespace

CaseRecord& SuiteReport::check_le(std::string name, json params, double lhs, double rhs, double tol, double budget,
                                  BoundSource src) {
    CaseRecord c = make(std::move(name), std::move(params), lhs, rhs, tol, budget, src);
    const double cap = rhs * (1.0 + tol);
    c.pass = !std::isnan(lhs) && lhs <= cap + budget;
    c.marginal = c.pass && budget > 0.0 && cap - lhs < budget;
    cases.push_back(std::move(c));
    return cases.back();
}

CaseRecord& SuiteReport::check_ge(std::string name, json params, double lhs, double rhs, double tol, double budget,
                                  BoundSource src) {
    CaseRecord c = make(std::move(name), std::move(params), lhs, rhs, tol, budget, src);
    c.ratio = safe_ratio(rhs, lhs);
    const double floor = rhs * (1.0 - tol);
    c.pass = !std::isnan(lhs) && lhs >= floor - budget;
    c.marginal = c.pass && budget > 0.0 && lhs - floor < budget;
    cases.push_back(std::move(c));
    return cases.back();
}

CaseRecord& SuiteReport::check_close(std::string name, json params, double lhs, double rhs, double tol, double budget,
                                     BoundSource src) {
    CaseRecord c = make(std::move(name), std::move(params), lhs, rhs, tol, budget, src);
    const double dev = std::fabs(lhs - rhs), cap = tol * std::fabs(rhs);
    c.pass = dev <= cap + budget;
    c.marginal = c.pass && budget > 0.0 && cap - dev < budget;
    cases.push_back(std::move(c));
    return cases.back();
}

CaseRecord& SuiteReport::check_true(std::string name, json params, bool ok, double lhs, double rhs, BoundSource src) {
    CaseRecord c = make(std::move(name), std::move(params), lhs, rhs, 0.0, 0.0, src);
    c.pass = ok;
    cases.push_back(std::move(c));
    return cases.back();
}

CaseRecord& SuiteReport::describe(std::string name, json params, double lhs, double rhs) {
    CaseRecord c = make(std::move(name), std::move(params), lhs, rhs, 0.0, 0.0, BoundSource::Descriptive);
    c.pass = true;
    cases.push_back(std::move(c));
    return cases.back();
}

void SuiteReport::merge(const SuiteReport& other) {
    cases.insert(cases.end(), other.cases.begin(), other.cases.end());
    series.insert(series.end(), other.series.begin(), other.series.end());
    if (!other.summary.empty()) summary[other.suite] = other.summary;
    for (auto it = other.environment.begin(); it != other.environment.end(); ++it)
        if (!environment.contains(it.key())) environment[it.key()] = it.value();
}

int SuiteReport::failures() const {
    int n = 0;
    for (const auto& c : cases) n += c.pass ? 0 : 1;
    return n;
}

int SuiteReport::marginal_count() const {
    int n = 0;
    for (const auto& c : cases) n += c.marginal ? 1 : 0;
    return n;
}

double SuiteReport::max_ratio() const {
    double m = 0.0;
    for (const auto& c : cases)
        if (c.source != BoundSource::Descriptive) m = std::max(m, c.ratio);
    return m;
}

json SuiteReport::to_json() const {
    json out;
    out["suite"] = suite;
    json arr = json::array();
    for (const auto& c : cases) {
        json j;
        j["name"] = c.name;
        j["parameters"] = c.params;
        j["lhs"] = number(c.lhs);
        j["rhs"] = number(c.rhs);
        j["ratio"] = number(c.ratio);
        j["tolerance"] = number(c.tolerance);
        j["budget"] = number(c.budget);
        j["pass"] = c.pass;
        j["marginal"] = c.marginal;
        j["bound"] = to_string(c.source);
        if (!c.note.empty()) j["note"] = c.note;
        arr.push_back(std::move(j));
    }
    out["cases"] = std::move(arr);
    out["environment"] = environment;
    out["summary"] = summary;
    out["aggregate"] = {{"cases", cases.size()},
                        {"failures", failures()},
                        {"marginal", marginal_count()},
                        {"max_ratio", number(max_ratio())},
                        {"pass", passed()}};
    return out;
}

std::string SuiteReport::to_csv() const {
    std::ostringstream os;
    os.precision(17);
    os << "case,x,y\n";
    for (const auto& p : series) os << p.series << ',' << p.x << ',' << p.y << '\n';
    return os.str();
}

}  // namespace wlab
