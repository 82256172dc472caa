#include "rmon/verdict_log.hpp"

#include <charconv>
#include <json.hpp>

#include "rmon/errors.hpp"

namespace rmon {

using nlohmann::json;
using ordered = nlohmann::ordered_json;

std::string format_number(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string header_line(const VerdictLogHeader& h) {
  ordered j;
  j["header"] = {{"seed", h.seed},
                 {"prng", h.prng},
                 {"variable", h.variable},
                 {"substitutions", h.substitutions}};
  return j.dump();
}

std::string verdict_line(const MonitorVerdict& v) {
  ordered outputs = ordered::array();
  for (const auto& o : v.outputs) {
    ordered value = ordered::array();
    for (const auto& iv : o.itom.value()) value.push_back({iv.lo(), iv.hi()});
    ordered out;
    out["s"] = o.substitution;
    out["v"] = std::move(value);
    out["t"] = {o.itom.time().lo(), o.itom.time().hi()};
    outputs.push_back(std::move(out));
  }
  ordered j;
  j["t"] = v.t_cur;
  j["failed"] = v.reported ? static_cast<long>(*v.reported) : -1L;
  j["errors"] = v.errors;
  j["comparable"] = v.comparable_count;
  j["outputs"] = std::move(outputs);
  return j.dump();
}

namespace {

Interval read_pair(const json& j) {
  if (!j.is_array() || j.size() != 2) throw Error("expected [lo, hi]");
  return Interval(j[0].get<double>(), j[1].get<double>());
}

}  // namespace

VerdictLog read_verdict_log(std::istream& in) {
  VerdictLog log;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      if (j.contains("header")) {
        const auto& h = j.at("header");
        VerdictLogHeader hdr;
        hdr.seed = h.at("seed").get<std::uint64_t>();
        hdr.prng = h.at("prng").get<std::string>();
        hdr.variable = h.at("variable").get<std::string>();
        hdr.substitutions = h.at("substitutions").get<std::vector<std::string>>();
        log.header = std::move(hdr);
        continue;
      }
      LoggedVerdict v;
      v.t = j.at("t").get<double>();
      const long failed = j.at("failed").get<long>();
      if (failed >= 0) v.failed = static_cast<std::size_t>(failed);
      v.errors = j.at("errors").get<std::vector<double>>();
      v.comparable = j.at("comparable").get<std::size_t>();
      for (const auto& o : j.value("outputs", json::array())) {
        LoggedOutput out;
        out.substitution = o.at("s").get<std::size_t>();
        for (const auto& p : o.at("v")) out.value.push_back(read_pair(p));
        out.time = read_pair(o.at("t"));
        v.outputs.push_back(std::move(out));
      }
      log.steps.push_back(std::move(v));
    } catch (const json::exception& e) {
      throw ParseError(std::string("bad verdict record: ") + e.what(), lineno, 1);
    } catch (const std::invalid_argument& e) {
      throw ParseError(std::string("bad verdict record: ") + e.what(), lineno, 1);
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(std::string("bad verdict record: ") + e.what(), lineno, 1);
    }
  }
  return log;
}

void write_report_csv(std::ostream& out, const VerdictLog& log) {
  std::size_t n = 0;
  for (const auto& s : log.steps) n = std::max(n, s.errors.size());
  out << "t,failed";
  for (std::size_t i = 0; i < n; ++i) out << ",err_" << i;
  out << '\n';
  for (const auto& s : log.steps) {
    out << format_number(s.t) << ',' << (s.failed ? static_cast<long>(*s.failed) : -1L);
    for (std::size_t i = 0; i < n; ++i) {
      out << ',';
      if (i < s.errors.size()) out << format_number(s.errors[i]);
    }
    out << '\n';
  }
}

}  // namespace rmon
