#include "satad/timeseries.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "satad/errors.hpp"

namespace satad {

void TimeSeries::validate() const {
  if (length() < 1 || channels() < 1) throw ContractError("TimeSeries must be at least 1x1");
  if (labels && labels->size() != length())
    throw ContractError("label count does not match series length");
  if (labels)
    for (int v : *labels)
      if (v < 0) throw ContractError("labels must be non-negative");
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

double parse_feature(const std::string& cell, std::size_t row, std::size_t col) {
  char* end = nullptr;
  double v = std::strtod(cell.c_str(), &end);
  if (end == cell.c_str() || *end != '\0' || !std::isfinite(v))
    throw ParseError("non-numeric feature cell at row " + std::to_string(row) + ", column " +
                     std::to_string(col) + ": '" + cell + "'");
  return v;
}

}  // namespace

TimeSeries load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("missing file: " + path);

  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty file: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> header = split_csv_line(line);

  std::size_t first_feature = header.size() > 1 && header.front() == "timestamp" ? 1 : 0;
  bool has_label = !header.empty() && header.back() == "label";
  std::size_t last_feature = header.size() - (has_label ? 1 : 0);
  if (last_feature <= first_feature) throw ParseError("no feature columns in " + path);
  std::size_t k = last_feature - first_feature;

  std::vector<double> values;
  std::vector<int> labels;
  std::size_t row = 1;  // header is row 0
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw ParseError("ragged row " + std::to_string(row) + ": expected " +
                       std::to_string(header.size()) + " cells, got " +
                       std::to_string(cells.size()));
    for (std::size_t c = first_feature; c < last_feature; ++c)
      values.push_back(parse_feature(cells[c], row, c));
    if (has_label) {
      const std::string& cell = cells.back();
      char* end = nullptr;
      long v = std::strtol(cell.c_str(), &end, 10);
      if (end == cell.c_str() || *end != '\0' || v < 0)
        throw ParseError("unknown label value at row " + std::to_string(row) + ": '" + cell + "'");
      labels.push_back(static_cast<int>(v));
    }
    ++row;
  }
  if (values.empty()) throw ParseError("no data rows in " + path);

  TimeSeries ts;
  ts.values = Tensor({values.size() / k, k});
  ts.values.data() = std::move(values);
  if (has_label) ts.labels = std::move(labels);
  for (std::size_t c = first_feature; c < last_feature; ++c) ts.channel_names.push_back(header[c]);
  ts.validate();
  return ts;
}

void save_csv(const TimeSeries& ts, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  for (std::size_t c = 0; c < ts.channels(); ++c) {
    if (c) out << ',';
    out << (c < ts.channel_names.size() ? ts.channel_names[c] : "c" + std::to_string(c));
  }
  if (ts.labels) out << ",label";
  out << '\n';
  char buf[64];
  for (std::size_t i = 0; i < ts.length(); ++i) {
    for (std::size_t c = 0; c < ts.channels(); ++c) {
      if (c) out << ',';
      std::snprintf(buf, sizeof buf, "%.17g", ts.values(i, c));
      out << buf;
    }
    if (ts.labels) out << ',' << (*ts.labels)[i];
    out << '\n';
  }
}

namespace {
constexpr char kCacheMagic[4] = {'S', 'A', 'T', 'D'};
constexpr std::uint16_t kCacheVersion = 1;

template <typename T>
void write_raw(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
void read_raw(std::ifstream& in, T& v, const char* what) {
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw ParseError(std::string("truncated cache file reading ") + what);
}
}  // namespace

void save_cache(const TimeSeries& ts, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out.write(kCacheMagic, 4);
  write_raw(out, kCacheVersion);
  write_raw(out, static_cast<std::uint64_t>(ts.length()));
  write_raw(out, static_cast<std::uint64_t>(ts.channels()));
  out.write(reinterpret_cast<const char*>(ts.values.data().data()),
            static_cast<std::streamsize>(ts.values.size() * sizeof(double)));
  std::uint8_t has_labels = ts.labels ? 1 : 0;
  write_raw(out, has_labels);
  if (ts.labels)
    for (int v : *ts.labels) write_raw(out, static_cast<std::int32_t>(v));
}

TimeSeries load_cache(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("missing file: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kCacheMagic, 4) != 0)
    throw ParseError("bad magic in cache file: " + path);
  std::uint16_t version;
  read_raw(in, version, "version");
  if (version != kCacheVersion)
    throw ParseError("unsupported cache version " + std::to_string(version));
  std::uint64_t m, k;
  read_raw(in, m, "M");
  read_raw(in, k, "K");
  TimeSeries ts;
  ts.values = Tensor({static_cast<std::size_t>(m), static_cast<std::size_t>(k)});
  in.read(reinterpret_cast<char*>(ts.values.data().data()),
          static_cast<std::streamsize>(ts.values.size() * sizeof(double)));
  if (!in) throw ParseError("truncated cache file reading values");
  std::uint8_t has_labels;
  read_raw(in, has_labels, "label flag");
  if (has_labels) {
    std::vector<int> labels(m);
    for (auto& v : labels) {
      std::int32_t raw;
      read_raw(in, raw, "labels");
      v = raw;
    }
    ts.labels = std::move(labels);
  }
  ts.validate();
  return ts;
}

NormStats fit_normalizer(const TimeSeries& train) {
  if (train.length() < 2) throw ContractError("fit_normalizer needs M >= 2");
  std::size_t k = train.channels();
  std::size_t m = train.length();
  NormStats stats;
  stats.mean.assign(k, 0.0);
  stats.stddev.assign(k, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t c = 0; c < k; ++c) stats.mean[c] += train.values(i, c);
  for (double& v : stats.mean) v /= static_cast<double>(m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t c = 0; c < k; ++c) {
      double d = train.values(i, c) - stats.mean[c];
      stats.stddev[c] += d * d;
    }
  for (double& v : stats.stddev) {
    v = std::sqrt(v / static_cast<double>(m));  // population std
    v = std::max(v, NormStats::kStdFloor);
  }
  return stats;
}

TimeSeries apply_normalizer(const TimeSeries& ts, const NormStats& stats) {
  if (stats.mean.size() != ts.channels()) throw ContractError("normalizer channel mismatch");
  TimeSeries out = ts;
  for (std::size_t i = 0; i < ts.length(); ++i)
    for (std::size_t c = 0; c < ts.channels(); ++c)
      out.values(i, c) = (ts.values(i, c) - stats.mean[c]) / stats.stddev[c];
  return out;
}

TimeSeries invert_normalizer(const TimeSeries& ts, const NormStats& stats) {
  if (stats.mean.size() != ts.channels()) throw ContractError("normalizer channel mismatch");
  TimeSeries out = ts;
  for (std::size_t i = 0; i < ts.length(); ++i)
    for (std::size_t c = 0; c < ts.channels(); ++c)
      out.values(i, c) = ts.values(i, c) * stats.stddev[c] + stats.mean[c];
  return out;
}

WindowSet make_windows(const TimeSeries& ts, const WindowConfig& cfg) {
  std::size_t m = ts.length();
  std::size_t k = ts.channels();
  if (cfg.w > m) throw ConfigError("window length exceeds series length");
  if (cfg.s < 1 || cfg.s > cfg.w) throw ConfigError("stride must satisfy 1 <= s <= w");

  WindowSet ws;
  ws.w = cfg.w;
  ws.s = cfg.s;
  std::size_t count = (m - cfg.w) / cfg.s + 1;
  ws.windows.reserve(count);
  ws.start_indices.reserve(count);
  for (std::size_t idx = 0; idx < count; ++idx) {
    std::size_t start = idx * cfg.s;
    Tensor win({cfg.w, k});
    for (std::size_t i = 0; i < cfg.w; ++i)
      for (std::size_t c = 0; c < k; ++c) win(i, c) = ts.values(start + i, c);
    ws.windows.push_back(std::move(win));
    ws.start_indices.push_back(start);
    if (ts.labels) {
      // any anomalous step makes the window anomalous; otherwise the
      // majority positive label (ties to the lowest id)
      bool anomalous = false;
      std::map<int, std::size_t> counts;
      for (std::size_t i = 0; i < cfg.w; ++i) {
        int lab = (*ts.labels)[start + i];
        if (lab == 0) anomalous = true;
        else ++counts[lab];
      }
      int label = 0;
      if (!anomalous) {
        std::size_t best = 0;
        for (const auto& [lab, n] : counts)
          if (n > best) {
            best = n;
            label = lab;
          }
      }
      ws.window_labels.push_back(label);
    }
  }
  return ws;
}

WindowSet dedup_filter(const WindowSet& ws, double mse_threshold) {
  if (mse_threshold < 0.0) throw ConfigError("dedup threshold must be >= 0");
  WindowSet out;
  out.w = ws.w;
  out.s = ws.s;
  for (std::size_t i = 0; i < ws.count(); ++i) {
    if (!out.windows.empty() && mse(ws.windows[i], out.windows.back()) < mse_threshold) continue;
    out.windows.push_back(ws.windows[i]);
    out.start_indices.push_back(ws.start_indices[i]);
    if (!ws.window_labels.empty()) out.window_labels.push_back(ws.window_labels[i]);
  }
  return out;
}

}  // namespace satad
