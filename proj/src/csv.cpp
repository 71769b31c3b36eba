#include "gfe/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "gfe/errors.hpp"

namespace gfe::csv {

std::string format_double(double value) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  return out;
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

double parse_double(const std::string& field, const std::string& path, long line_no) {
  const char* begin = field.data();
  const char* end = begin + field.size();
  while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
  while (end > begin && (*(end - 1) == ' ' || *(end - 1) == '\t' || *(end - 1) == '\r')) --end;
  double value = 0.0;
  const auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc() || res.ptr != end) {
    throw ParseError("cannot parse numeric field '" + field + "'", path, line_no);
  }
  if (!std::isfinite(value)) {
    throw ParseError("non-finite value '" + field + "'", path, line_no);
  }
  return value;
}

}  // namespace

void write_session(const std::string& path, const SessionRecording& rec,
                   const std::string& config_hash) {
  rec.validate();
  std::ofstream out = open_out(path);
  if (!config_hash.empty()) out << "# config_hash=" << config_hash << "\n";
  out << "# sample_rate_hz=" << format_double(rec.sample_rate_hz) << "\n";
  out << "t_ms";
  for (std::size_t c = 0; c < rec.channels(); ++c) out << ",emg" << c + 1;
  out << ",force\n";
  for (std::size_t k = 0; k < rec.samples(); ++k) {
    out << format_double(k * 1000.0 / rec.sample_rate_hz);
    for (std::size_t c = 0; c < rec.channels(); ++c) out << ',' << format_double(rec.emg[c][k]);
    out << ',' << format_double(rec.force[k]) << '\n';
  }
}

SessionRecording read_session(const std::string& path, std::optional<double> mvc_newtons) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file", path, 0);
  if (mvc_newtons && !(*mvc_newtons > 0.0)) {
    throw std::invalid_argument("MVC must be positive");
  }

  std::string line;
  long line_no = 0;
  double comment_rate = 0.0;

  // Optional comment lines, then the header.
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') {
      const std::string key = "# sample_rate_hz=";
      if (line.rfind(key, 0) == 0) comment_rate = parse_double(line.substr(key.size()), path, line_no);
      continue;
    }
    break;
  }
  if (line.empty() || line[0] == '#') throw ParseError("missing header row", path, line_no);

  const std::vector<std::string> header = split_line(line);
  if (header.size() < 3 || header[0] != "t_ms" || header.back() != "force") {
    throw ParseError("header must be t_ms,emg1..emgN,force", path, line_no);
  }
  const std::size_t channels = header.size() - 2;
  for (std::size_t c = 0; c < channels; ++c) {
    if (header[c + 1] != "emg" + std::to_string(c + 1)) {
      throw ParseError("unexpected column name '" + header[c + 1] + "'", path, line_no);
    }
  }

  SessionRecording rec;
  rec.emg.assign(channels, {});
  std::vector<double> t_ms;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const std::vector<std::string> fields = split_line(line);
    if (fields.size() != header.size()) {
      throw ParseError("expected " + std::to_string(header.size()) + " fields, got " +
                           std::to_string(fields.size()),
                       path, line_no);
    }
    t_ms.push_back(parse_double(fields[0], path, line_no));
    for (std::size_t c = 0; c < channels; ++c) {
      rec.emg[c].push_back(parse_double(fields[c + 1], path, line_no));
    }
    double force = parse_double(fields.back(), path, line_no);
    if (mvc_newtons) force /= *mvc_newtons;
    rec.force.push_back(force);
  }
  if (rec.force.empty()) throw ParseError("file contains no data rows", path, line_no);

  if (comment_rate > 0.0) {
    rec.sample_rate_hz = comment_rate;
  } else if (t_ms.size() >= 2 && t_ms[1] > t_ms[0]) {
    rec.sample_rate_hz = 1000.0 / (t_ms[1] - t_ms[0]);
  } else {
    throw ParseError("cannot infer sample rate (need a rate comment or two rows)", path, line_no);
  }
  rec.channel_labels = SessionRecording::default_channel_labels(channels);
  try {
    rec.validate();
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what(), path, line_no);
  }
  return rec;
}

void write_features(const std::string& path, const FeatureMatrix& fm,
                    const std::string& config_hash) {
  std::ofstream out = open_out(path);
  if (!config_hash.empty()) out << "# config_hash=" << config_hash << "\n";
  for (std::size_t c = 0; c < fm.layout.size(); ++c) {
    out << (c == 0 ? "" : ",") << fm.layout[c].label();
  }
  out << ",force\n";
  for (long k = 0; k < fm.rows(); ++k) {
    for (long c = 0; c < fm.cols(); ++c) {
      out << (c == 0 ? "" : ",") << format_double(fm.u(k, c));
    }
    out << ',' << format_double(fm.y[k]) << '\n';
  }
}

void write_estimates(const std::string& path, double ts_s, const std::vector<double>& measured,
                     const std::vector<double>& model_output,
                     const std::vector<double>* filtered_output, const std::string& config_hash) {
  std::ofstream out = open_out(path);
  if (!config_hash.empty()) out << "# config_hash=" << config_hash << "\n";
  out << "window,t_s,force_measured,force_ss";
  if (filtered_output != nullptr) out << ",force_kf";
  out << '\n';
  for (std::size_t k = 0; k < measured.size(); ++k) {
    out << k << ',' << format_double(k * ts_s) << ',' << format_double(measured[k]) << ','
        << format_double(model_output[k]);
    if (filtered_output != nullptr) out << ',' << format_double((*filtered_output)[k]);
    out << '\n';
  }
}

void write_report(const std::string& path, const metrics::EvalReport& report,
                  const std::vector<std::string>& model_order, const std::string& config_hash) {
  std::ofstream out = open_out(path);
  if (!config_hash.empty()) out << "# config_hash=" << config_hash << "\n";
  out << "subject";
  for (const auto& model : model_order) out << ',' << model << "_r2," << model << "_nrmse";
  out << '\n';

  // Rows keyed by subject in first-appearance order.
  std::vector<std::string> subjects;
  std::map<std::string, std::map<std::string, const metrics::EvalCell*>> cells;
  for (const auto& cell : report.per_subject) {
    if (cells.find(cell.subject) == cells.end()) subjects.push_back(cell.subject);
    cells[cell.subject][cell.model] = &cell;
  }
  for (const auto& subject : subjects) {
    out << subject;
    for (const auto& model : model_order) {
      const auto it = cells[subject].find(model);
      const metrics::EvalCell* cell = it == cells[subject].end() ? nullptr : it->second;
      out << ',' << (cell != nullptr && cell->r2 ? format_double(*cell->r2) : "");
      out << ',' << (cell != nullptr && cell->nrmse ? format_double(*cell->nrmse) : "");
    }
    out << '\n';
  }

  auto aggregate_row = [&](const std::string& label, bool sd) {
    out << label;
    for (const auto& model : model_order) {
      const metrics::EvalAggregate* agg = nullptr;
      for (const auto& a : report.aggregate) {
        if (a.model == model) agg = &a;
      }
      if (agg == nullptr) {
        out << ",,";
      } else {
        out << ',' << format_double(sd ? agg->r2_sd : agg->r2_mean) << ','
            << format_double(sd ? agg->nrmse_sd : agg->nrmse_mean);
      }
    }
    out << '\n';
  };
  aggregate_row("average", false);
  aggregate_row("sd", true);
}

}  // namespace gfe::csv
