#include "dlrlab/rate_trace.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace dlrlab {

double matrix_mean(const Matrix& m) {
  if (m.empty()) throw std::invalid_argument("matrix_mean: empty matrix");
  double total = 0.0;
  const double* p = m.data();
  for (std::size_t i = 0; i < m.size(); ++i) total += p[i];
  return total / static_cast<double>(m.size());
}

void record(RateTrace& trace, double t, const Matrix& rates) {
  if (!trace.t.empty() && t <= trace.t.back())
    throw std::invalid_argument("record: t=" + std::to_string(t) +
                                " does not exceed the last sample t=" +
                                std::to_string(trace.t.back()));
  trace.t.push_back(t);
  trace.mean_rate.push_back(matrix_mean(rates));
}

namespace {

void write_full(std::ostream& out, double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.write(buf, ptr - buf);
}

}  // namespace

void write_traces_csv(std::ostream& out, const std::vector<RateTrace>& traces) {
  out << "layer_id,t_epochs,mean_rate\n";
  for (const auto& trace : traces) {
    for (std::size_t i = 0; i < trace.size(); ++i) {
      out << trace.layer_id << ',';
      write_full(out, trace.t[i]);
      out.put(',');
      write_full(out, trace.mean_rate[i]);
      out.put('\n');
    }
  }
}

void write_traces_csv(const std::string& path, const std::vector<RateTrace>& traces) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open file for writing: " + path);
  write_traces_csv(out, traces);
}

std::vector<RateTrace> read_traces_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "layer_id,t_epochs,mean_rate")
    throw std::runtime_error("rate trace CSV: bad header");
  std::map<int, RateTrace> by_layer;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string field;
    std::getline(row, field, ',');
    const int layer = std::stoi(field);
    std::getline(row, field, ',');
    const double t = std::stod(field);
    std::getline(row, field, ',');
    const double rate = std::stod(field);
    auto& trace = by_layer[layer];
    trace.layer_id = layer;
    trace.t.push_back(t);
    trace.mean_rate.push_back(rate);
  }
  std::vector<RateTrace> traces;
  traces.reserve(by_layer.size());
  for (auto& [_, trace] : by_layer) traces.push_back(std::move(trace));
  return traces;
}

std::vector<RateTrace> read_traces_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  return read_traces_csv(in);
}

}  // namespace dlrlab
