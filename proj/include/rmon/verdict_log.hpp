#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "rmon/monitor.hpp"

namespace rmon {

// JSON-lines verdict log. The first line is a header object
//   {"header": {"seed": 7, "prng": "mt19937_64", "variable": "dmin",
//               "substitutions": ["substitution(dmin,...)", ...]}}
// followed by one object per step
//   {"t": 1.0, "failed": -1, "errors": [0.0, ...], "comparable": 3,
//    "outputs": [{"s": 0, "v": [[lo, hi], ...], "t": [lo, hi]}, ...]}
// "failed" holds the filtered (reported) index, -1 for none.

struct VerdictLogHeader {
  std::uint64_t seed = 0;
  std::string prng = "mt19937_64";
  std::string variable;
  std::vector<std::string> substitutions;
};

struct LoggedOutput {
  std::size_t substitution = 0;
  std::vector<Interval> value;
  Interval time{0.0, 0.0};
};

struct LoggedVerdict {
  double t = 0.0;
  std::optional<std::size_t> failed;
  std::vector<double> errors;
  std::size_t comparable = 0;
  std::vector<LoggedOutput> outputs;
};

struct VerdictLog {
  std::optional<VerdictLogHeader> header;
  std::vector<LoggedVerdict> steps;
};

std::string header_line(const VerdictLogHeader& header);
std::string verdict_line(const MonitorVerdict& verdict);

class VerdictWriter {
 public:
  explicit VerdictWriter(std::ostream& out) : out_(out) {}
  void header(const VerdictLogHeader& h) { out_ << header_line(h) << '\n'; }
  void write(const MonitorVerdict& v) { out_ << verdict_line(v) << '\n'; }

 private:
  std::ostream& out_;
};

/// Throws ParseError with the 1-based line of the offending record.
VerdictLog read_verdict_log(std::istream& in);

/// CSV with columns t,failed,err_0..err_{n-1}; n is the widest error vector.
void write_report_csv(std::ostream& out, const VerdictLog& log);

/// Shortest decimal text that reads back to the same double.
std::string format_number(double x);

}  // namespace rmon
