#include "filsim/io.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace filsim {

std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string json_vec(const Vec& x) {
    std::string out = "[";
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (i > 0) out += ", ";
        out += format_g17(x[i]);
    }
    return out + "]";
}

std::string json_number_or_null(double v) {
    return std::isfinite(v) ? format_g17(v) : std::string("null");
}

void write_csv(std::ostream& os, const Trajectory& tr) {
    Eigen::Index dim = 0;
    for (const Segment& seg : tr.segments)
        if (!seg.samples.empty()) {
            dim = seg.samples.front().x.size();
            break;
        }
    os << "t";
    for (Eigen::Index i = 1; i <= dim; ++i) os << ",x" << i;
    os << ",mode\n";
    for (const Segment& seg : tr.segments)
        for (const Sample& s : seg.samples) {
            os << format_g17(s.t);
            for (Eigen::Index i = 0; i < s.x.size(); ++i)
                os << ',' << format_g17(s.x[i]);
            os << ',' << to_string(seg.mode) << '\n';
        }
}

void write_events_jsonl(std::ostream& os, const Trajectory& tr) {
    for (const Event& e : tr.events) {
        os << "{\"t\": " << format_g17(e.t) << ", \"x\": " << json_vec(e.point)
           << ", \"kind\": \"" << to_string(e.kind)
           << "\", \"nu\": " << json_number_or_null(e.nu)
           << ", \"s\": " << json_number_or_null(e.s) << "}\n";
    }
}

}  // namespace filsim
