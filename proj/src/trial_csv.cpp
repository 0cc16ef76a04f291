#include "gseq/trial_csv.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <vector>

#include "gseq/errors.hpp"

namespace gseq {

namespace {

[[noreturn]] void fail_line(std::size_t line, const std::string& what) {
  throw invalid_data_error("trial csv line " + std::to_string(line) + ": " + what);
}

void strip_cr(std::string& s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
}

}  // namespace

TrialData read_trial_csv(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;

  if (!std::getline(in, line)) {
    throw invalid_data_error("trial csv: empty input");
  }
  ++lineno;
  strip_cr(line);
  if (line != "stage,arm,value") {
    fail_line(lineno, "expected header 'stage,arm,value', got '" + line + "'");
  }

  std::vector<StageBlock> stages;
  bool any_row = false;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (line.empty()) continue;

    const auto c1 = line.find(',');
    const auto c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos ||
        line.find(',', c2 + 1) != std::string::npos) {
      fail_line(lineno, "expected exactly three comma-separated fields");
    }
    const std::string stage_str = line.substr(0, c1);
    const std::string arm = line.substr(c1 + 1, c2 - c1 - 1);
    const std::string value_str = line.substr(c2 + 1);

    if (stage_str.empty() ||
        stage_str.find_first_not_of("0123456789") != std::string::npos) {
      fail_line(lineno, "stage must be a positive integer, got '" + stage_str + "'");
    }
    errno = 0;
    char* end = nullptr;
    const long stage_l = std::strtol(stage_str.c_str(), &end, 10);
    if (errno != 0 || *end != '\0' || stage_l < 1 || stage_l > 1000000) {
      fail_line(lineno, "stage out of range: '" + stage_str + "'");
    }
    const auto stage = static_cast<std::size_t>(stage_l);

    if (arm != "treatment" && arm != "control") {
      fail_line(lineno, "arm must be 'treatment' or 'control', got '" + arm + "'");
    }

    if (value_str.empty()) fail_line(lineno, "missing value");
    errno = 0;
    end = nullptr;
    const double value = std::strtod(value_str.c_str(), &end);
    if (errno != 0 || end == value_str.c_str() || *end != '\0') {
      fail_line(lineno, "value is not a number: '" + value_str + "'");
    }
    if (!std::isfinite(value)) {
      fail_line(lineno, "value must be finite, got '" + value_str + "'");
    }

    if (stage > stages.size()) stages.resize(stage);
    auto& blk = stages[stage - 1];
    (arm == "treatment" ? blk.treatment : blk.control).push_back(value);
    any_row = true;
  }
  if (!any_row) throw invalid_data_error("trial csv: no data rows");

  for (std::size_t s = 0; s < stages.size(); ++s) {
    if (stages[s].treatment.empty() && stages[s].control.empty()) {
      throw invalid_data_error("trial csv: stage " + std::to_string(s + 1) +
                               " has no rows; stages must be contiguous from 1");
    }
  }

  TrialData data;
  data.stages = std::move(stages);
  data.validate();
  return data;
}

TrialData read_trial_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw invalid_data_error("trial csv: cannot open '" + path + "'");
  return read_trial_csv(in);
}

std::string write_trial_csv(const TrialData& data) {
  data.validate();
  std::string out = "stage,arm,value\n";
  char buf[64];
  for (std::size_t s = 0; s < data.stages.size(); ++s) {
    for (double x : data.stages[s].treatment) {
      std::snprintf(buf, sizeof(buf), "%zu,treatment,%.17g\n", s + 1, x);
      out += buf;
    }
    for (double x : data.stages[s].control) {
      std::snprintf(buf, sizeof(buf), "%zu,control,%.17g\n", s + 1, x);
      out += buf;
    }
  }
  return out;
}

}  // namespace gseq
