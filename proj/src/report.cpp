#include "eitlog/report.hpp"

#include "eitlog/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace eitlog {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string sanitize(const std::string& s) {
    std::string out = s;
    for (char& c : out)
        if (c == ' ' || c == '/' || c == ':') c = '_';
    return out;
}

} // namespace

std::string report_to_json(const ExperimentReport& report) {
    ordered_json j;
    j["experiment"] = report.experiment;
    ordered_json params = ordered_json::object();
    for (const auto& [k, v] : report.params) params[k] = v;
    j["params"] = params;

    ordered_json slopes = ordered_json::array();
    for (const SlopeFit& s : report.slopes) {
        ordered_json e;
        e["name"] = s.name;
        e["curve"] = s.curve;
        e["slope"] = s.slope;
        e["intercept"] = s.intercept;
        e["fit_residual"] = s.residual;
        e["band_lo"] = s.lo;
        e["band_hi"] = s.hi;
        e["pass"] = s.pass;
        slopes.push_back(e);
    }
    j["slopes"] = slopes;

    ordered_json checks = ordered_json::array();
    for (const CheckItem& c : report.checks) {
        ordered_json e;
        e["name"] = c.name;
        e["value"] = c.value;
        e["threshold"] = c.threshold;
        e["relation"] = c.relation;
        e["pass"] = c.pass;
        checks.push_back(e);
    }
    j["checks"] = checks;

    ordered_json scalars = ordered_json::object();
    for (const auto& [k, v] : report.scalars) scalars[k] = v;
    j["scalars"] = scalars;

    ordered_json curves = ordered_json::array();
    for (const Curve& c : report.curves) {
        ordered_json e;
        e["name"] = c.name;
        e["x_label"] = c.x_label;
        e["y_label"] = c.y_label;
        ordered_json pts = ordered_json::array();
        for (const auto& p : c.points) pts.push_back({p[0], p[1]});
        e["points"] = pts;
        curves.push_back(e);
    }
    j["curves"] = curves;
    j["passed"] = report.passed();
    return j.dump(2) + "\n";
}

std::filesystem::path write_report_json(const ExperimentReport& report,
                                        const std::string& name,
                                        const std::filesystem::path& dir) {
    const auto path = dir / ("report_" + sanitize(name) + ".json");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IOError("write_report_json: cannot open " + path.string());
    out << report_to_json(report);
    if (!out) throw IOError("write_report_json: write failed");
    return path;
}

std::vector<std::filesystem::path> emit_plotdata(
    const ExperimentReport& report, const std::string& name,
    const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> written;
    for (const Curve& c : report.curves) {
        const auto path = dir / (sanitize(name) + "_" + sanitize(c.name) + ".csv");
        std::ofstream out(path, std::ios::binary);
        if (!out) throw IOError("emit_plotdata: cannot open " + path.string());
        out.precision(17);
        out << c.x_label << ',' << c.y_label << '\n';
        for (const auto& p : c.points) out << p[0] << ',' << p[1] << '\n';
        if (!out) throw IOError("emit_plotdata: write failed");
        written.push_back(path);
    }
    for (const SlopeFit& s : report.slopes) {
        if (s.curve.empty()) continue;
        const Curve& c = report.curve(s.curve);
        const auto path =
            dir / (sanitize(name) + "_" + sanitize(s.curve) + "_fit.csv");
        std::ofstream out(path, std::ios::binary);
        if (!out) throw IOError("emit_plotdata: cannot open " + path.string());
        out.precision(17);
        out << c.x_label << ',' << c.y_label << "_fit\n";
        for (const auto& p : c.points) {
            const double y = s.space == FitSpace::LogLog
                                 ? std::exp(s.intercept + s.slope * std::log(p[0]))
                                 : s.intercept + s.slope * std::log(p[0]);
            out << p[0] << ',' << y << '\n';
        }
        if (!out) throw IOError("emit_plotdata: write failed");
        written.push_back(path);
    }
    return written;
}

std::uint64_t fnv1a64_bytes(const void* data, std::size_t size) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
        h ^= bytes[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

std::uint64_t fnv1a64_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IOError("fnv1a64_file: cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string s = buf.str();
    return fnv1a64_bytes(s.data(), s.size());
}

std::filesystem::path write_manifest(
    const std::filesystem::path& dir,
    const std::vector<std::filesystem::path>& files) {
    std::vector<std::pair<std::string, std::uint64_t>> entries;
    for (const auto& f : files)
        entries.emplace_back(f.filename().string(), fnv1a64_file(f));
    std::sort(entries.begin(), entries.end());
    const auto path = dir / "manifest.txt";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IOError("write_manifest: cannot open " + path.string());
    for (const auto& [name, hash] : entries) {
        out << std::hex;
        out.width(16);
        out.fill('0');
        out << hash << "  " << name << '\n';
        out << std::dec;
    }
    if (!out) throw IOError("write_manifest: write failed");
    return path;
}

std::string format_summary(const ExperimentReport& report) {
    std::ostringstream os;
    os << (report.passed() ? "[pass] " : "[FAIL] ") << report.experiment;
    os << " (" << report.runtime_seconds << " s)\n";
    for (const SlopeFit& s : report.slopes)
        os << "  " << (s.pass ? "ok   " : "FAIL ") << s.name << " slope="
           << s.slope << " band=[" << s.lo << ", " << s.hi
           << "] residual=" << s.residual << '\n';
    for (const CheckItem& c : report.checks)
        os << "  " << (c.pass ? "ok   " : "FAIL ") << c.name << " value="
           << c.value << ' ' << c.relation << ' ' << c.threshold << '\n';
    for (const auto& [k, v] : report.scalars)
        os << "  .    " << k << " = " << v << '\n';
    return os.str();
}

} // namespace eitlog
