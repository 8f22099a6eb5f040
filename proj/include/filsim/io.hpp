#pragma once

#include <iosfwd>
#include <string>

#include "filsim/integrate.hpp"

namespace filsim {

/// Render a double with 17 significant digits — enough to round-trip, so a
/// rerun with the same configuration reproduces its output byte for byte.
std::string format_g17(double v);

/// A JSON array of the vector's entries, each in 17-digit form.
std::string json_vec(const Vec& x);

/// A 17-digit JSON number, or null when the value is not finite.
std::string json_number_or_null(double v);

/// CSV with a header line `t,x1,...,xn,mode` and one row per stored sample;
/// `mode` is the owning segment's mode token.
void write_csv(std::ostream& os, const Trajectory& tr);

/// One JSON object per event and per line, with fields {t, x, kind, nu, s}.
/// Non-finite nu/s values (events with no such quantity) serialize as null.
void write_events_jsonl(std::ostream& os, const Trajectory& tr);

}  // namespace filsim
