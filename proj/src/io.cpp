#include "rflow/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "rflow/errors.hpp"

namespace rflow {

namespace {

std::ofstream open_for_write(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write to " + path);
    return out;
}

std::string escape_json(const std::string& text) {
    std::string out;
    out.reserve(text.size() + 2);
    for (char c : text) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    return out;
}

const char* verdict_name(Verdict verdict) {
    switch (verdict) {
        case Verdict::Pass: return "pass";
        case Verdict::Fail: return "fail";
        case Verdict::Inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

}  // namespace

std::string format_short(double value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.12g", value);
    return buf;
}

std::string format_exact(double value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

std::string u_sidecar_path(const std::string& trace_csv_path) {
    const std::size_t dot = trace_csv_path.find_last_of('.');
    const std::size_t slash = trace_csv_path.find_last_of("/\\");
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
        return trace_csv_path + ".u.csv";
    return trace_csv_path.substr(0, dot) + ".u" + trace_csv_path.substr(dot);
}

void write_trace_csv(const FlowTrace& trace, const std::string& path) {
    std::ofstream out = open_for_write(path);
    out << "step,t,lambda1,total_area,max_dev,min_corner_angle\n";
    for (const FlowSample& s : trace.samples) {
        out << s.step << ',' << format_short(s.t) << ',' << format_short(s.lambda1) << ','
            << format_short(s.total_area) << ',' << format_short(s.max_dev) << ','
            << format_short(s.min_corner_angle) << '\n';
    }
    if (!out) throw ConfigError("write failed for " + path);

    std::ofstream sidecar = open_for_write(u_sidecar_path(path));
    for (const FlowSample& s : trace.samples) {
        for (Eigen::Index i = 0; i < s.u.size(); ++i) {
            if (i > 0) sidecar << ',';
            sidecar << format_exact(s.u[i]);
        }
        sidecar << '\n';
    }
    if (!sidecar) throw ConfigError("write failed for " + u_sidecar_path(path));
}

void write_report_json(const VerificationReport& report, const FlowTrace& trace,
                       const std::string& u_sidecar, const std::string& path) {
    std::ofstream out = open_for_write(path);
    out << "{\n";
    out << "  \"verdict\": \"" << verdict_name(report.verdict) << "\",\n";
    out << "  \"semicontinuity_pass\": " << (report.semicontinuity_pass ? "true" : "false")
        << ",\n";
    out << "  \"lambda_final\": " << format_exact(report.lambda_final) << ",\n";
    out << "  \"tail_limsup\": " << format_exact(report.tail_limsup) << ",\n";
    out << "  \"margin\": " << format_exact(report.margin) << ",\n";
    out << "  \"epsilon_semi\": " << format_exact(report.epsilon_semi) << ",\n";
    out << "  \"rayleigh_violations\": " << report.rayleigh_violations << ",\n";
    out << "  \"h_centering_max\": " << format_exact(report.h_centering_max) << ",\n";
    out << "  \"identity_max_err\": " << format_exact(report.identity_max_err) << ",\n";
    out << "  \"converged\": " << (trace.converged ? "true" : "false") << ",\n";
    out << "  \"aborted\": " << (trace.aborted ? "true" : "false") << ",\n";
    out << "  \"t_final\": " << format_exact(trace.t_final) << ",\n";
    out << "  \"sample_count\": " << trace.samples.size() << ",\n";
    out << "  \"u_snapshots\": \"" << escape_json(u_sidecar) << "\",\n";
    out << "  \"c_series\": [";
    for (std::size_t i = 0; i < report.c_series.size(); ++i) {
        if (i > 0) out << ',';
        out << "\n    [" << format_exact(report.c_series[i].first) << ", "
            << format_exact(report.c_series[i].second) << ']';
    }
    if (!report.c_series.empty()) out << "\n  ";
    out << "]\n";
    out << "}\n";
    if (!out) throw ConfigError("write failed for " + path);
}

}  // namespace rflow
