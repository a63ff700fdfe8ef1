// Copyright 2026 The privaudit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// File formats.
//
// Parameter snapshot (.paud): 8-byte magic "PAUD0001", a little-endian
// uint32 header length, a UTF-8 JSON header {"layout": 1, "model": {...}},
// then param_count little-endian IEEE-754 doubles in layout order.
//
// CSV files: UTF-8, RFC-4180 quoting, '\n' line ends. The first line is a
// '#' provenance comment carrying the toolkit version plus the config hash
// and master seed (never a timestamp), the second line is the column
// header. Doubles are printed with "%.17g" so files round-trip exactly and
// two runs of the same config are byte-identical.
//
// Dataset CSV: provenance line also records kind and feature dimensions;
// columns are label plus a semicolon-joined payload (feature floats for
// blob data, token ids for sequences). Query CSV: payload column only.

#ifndef PRIVAUDIT_IO_HPP
#define PRIVAUDIT_IO_HPP

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "privaudit/accounting.hpp"
#include "privaudit/data.hpp"
#include "privaudit/error.hpp"
#include "privaudit/model.hpp"
#include "privaudit/version.hpp"

namespace privaudit {

using json = nlohmann::json;

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// JSON conversions

inline json to_json(const ModelSpec& spec) {
  json j;
  if (spec.kind == ModelKind::kFeedForward) {
    j["kind"] = "feedforward";
    j["layer_dims"] = spec.layer_dims;
    j["hidden_activation"] =
        spec.hidden_activation == Activation::kTanh ? "tanh" : "relu";
  } else {
    j["kind"] = "recurrent";
    j["input_dim"] = spec.input_dim;
    j["hidden_dim"] = spec.hidden_dim;
    j["num_classes"] = spec.num_classes;
    j["cell"] = "elman_tanh";
  }
  return j;
}

inline ModelSpec model_spec_from_json(const json& j) {
  ModelSpec spec;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "feedforward") {
    spec.kind = ModelKind::kFeedForward;
    spec.layer_dims = j.at("layer_dims").get<std::vector<int>>();
    const std::string act = j.value("hidden_activation", "tanh");
    if (act == "tanh")
      spec.hidden_activation = Activation::kTanh;
    else if (act == "relu")
      spec.hidden_activation = Activation::kRelu;
    else
      throw ConfigError("model.hidden_activation: unknown value '" + act + "'");
  } else if (kind == "recurrent") {
    spec.kind = ModelKind::kRecurrent;
    spec.input_dim = j.at("input_dim").get<int>();
    spec.hidden_dim = j.at("hidden_dim").get<int>();
    spec.num_classes = j.at("num_classes").get<int>();
    const std::string cell = j.value("cell", "elman_tanh");
    if (cell != "elman_tanh")
      throw ConfigError("model.cell: unknown value '" + cell + "'");
  } else {
    throw ConfigError("model.kind: unknown value '" + kind + "'");
  }
  spec.validate();
  return spec;
}

inline json to_json(const RandomDpCertificate& cert) {
  json j;
  j["epsilon"] = std::isinf(cert.epsilon) ? json("inf") : json(cert.epsilon);
  j["delta"] = cert.delta;
  j["gamma"] = cert.gamma;
  j["n"] = cert.n;
  j["S_bar"] = cert.s_bar;
  j["sigma"] = cert.sigma;
  j["mu"] = cert.mu;
  j["basis"] = to_string(cert.basis);
  j["degenerate"] = cert.degenerate;
  return j;
}

// ---------------------------------------------------------------------------
// Parameter snapshots

inline constexpr char kSnapshotMagic[8] = {'P', 'A', 'U', 'D',
                                           '0', '0', '0', '1'};

inline void save_params(const std::string& path, const ModelSpec& spec,
                        const ParamVector& params) {
  if (params.size() != spec.param_count())
    throw ShapeError("save_params: parameter vector length does not match model");
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open for writing: " + path);
  f.write(kSnapshotMagic, 8);
  json header;
  header["layout"] = 1;
  header["model"] = to_json(spec);
  const std::string h = header.dump();
  const std::uint32_t len = static_cast<std::uint32_t>(h.size());
  unsigned char lenb[4] = {
      static_cast<unsigned char>(len & 0xFF),
      static_cast<unsigned char>((len >> 8) & 0xFF),
      static_cast<unsigned char>((len >> 16) & 0xFF),
      static_cast<unsigned char>((len >> 24) & 0xFF)};
  f.write(reinterpret_cast<const char*>(lenb), 4);
  f.write(h.data(), static_cast<std::streamsize>(h.size()));
  for (double v : params.values) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xFF);
    f.write(reinterpret_cast<const char*>(b), 8);
  }
  if (!f) throw IoError("write failed: " + path);
}

inline std::pair<ModelSpec, ParamVector> load_params(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open: " + path);
  char magic[8];
  f.read(magic, 8);
  if (!f || std::memcmp(magic, kSnapshotMagic, 8) != 0)
    throw IoError("not a parameter snapshot (bad magic): " + path);
  unsigned char lenb[4];
  f.read(reinterpret_cast<char*>(lenb), 4);
  if (!f) throw IoError("truncated snapshot header: " + path);
  const std::uint32_t len = static_cast<std::uint32_t>(lenb[0]) |
                            (static_cast<std::uint32_t>(lenb[1]) << 8) |
                            (static_cast<std::uint32_t>(lenb[2]) << 16) |
                            (static_cast<std::uint32_t>(lenb[3]) << 24);
  std::string h(len, '\0');
  f.read(h.data(), static_cast<std::streamsize>(len));
  if (!f) throw IoError("truncated snapshot header: " + path);
  json header;
  try {
    header = json::parse(h);
  } catch (const json::exception& e) {
    throw IoError("snapshot header is not valid JSON: " + std::string(e.what()));
  }
  if (header.value("layout", 0) != 1)
    throw IoError("unsupported snapshot layout version");
  ModelSpec spec = model_spec_from_json(header.at("model"));
  ParamVector params(spec.param_count());
  for (double& v : params.values) {
    unsigned char b[8];
    f.read(reinterpret_cast<char*>(b), 8);
    if (!f) throw IoError("truncated snapshot payload: " + path);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    std::memcpy(&v, &bits, 8);
  }
  if (!params.all_finite())
    throw IoError("snapshot contains non-finite parameters: " + path);
  return {std::move(spec), std::move(params)};
}

// ---------------------------------------------------------------------------
// CSV

struct Provenance {
  std::string config_hash;  // 16 hex digits
  std::uint64_t master_seed = 0;
  std::string extra;  // optional "key=value ..." tail

  std::string line() const {
    std::string s = "# privaudit ";
    s += kVersion;
    s += " config=" + (config_hash.empty() ? std::string("none") : config_hash);
    s += " seed=" + std::to_string(master_seed);
    if (!extra.empty()) s += ' ' + extra;
    return s;
  }
};

inline std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const Provenance& prov,
            const std::vector<std::string>& columns)
      : f_(path, std::ios::binary | std::ios::trunc), path_(path) {
    if (!f_) throw IoError("cannot open for writing: " + path);
    f_ << prov.line() << '\n';
    write_row(columns);
  }

  void write_row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) f_ << ',';
      f_ << csv_escape(fields[i]);
    }
    f_ << '\n';
    if (!f_) throw IoError("write failed: " + path_);
  }

 private:
  std::ofstream f_;
  std::string path_;
};

namespace detail {

inline std::vector<std::string> csv_split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

inline std::vector<std::string> split_on(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Dataset persistence

inline void save_dataset(const std::string& path, const DataSource& source,
                         const Dataset& data, const Provenance& prov) {
  Provenance p = prov;
  if (source.kind == SourceKind::kGaussianBlobs) {
    p.extra = "dataset=gaussian_blobs dims=" + std::to_string(source.dims) +
              " classes=" + std::to_string(source.classes);
  } else {
    p.extra = "dataset=synthetic_sequences classes=" + std::to_string(source.classes);
  }
  CsvWriter w(path, p, {"label", "payload"});
  for (const Example& ex : data) {
    std::string payload;
    if (source.kind == SourceKind::kGaussianBlobs) {
      for (std::size_t i = 0; i < ex.steps[0].size(); ++i) {
        if (i) payload += ';';
        payload += format_double(ex.steps[0][i]);
      }
    } else {
      for (std::size_t i = 0; i < ex.tokens.size(); ++i) {
        if (i) payload += ';';
        payload += std::to_string(ex.tokens[i]);
      }
    }
    w.write_row({std::to_string(ex.label), payload});
  }
}

struct LoadedDataset {
  SourceKind kind = SourceKind::kGaussianBlobs;
  int feature_dim = 0;  // dims for blobs, classes (vocab) for sequences
  Dataset data;
};

inline LoadedDataset load_dataset(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open: " + path);
  std::string line;
  if (!std::getline(f, line) || line.rfind("# privaudit", 0) != 0)
    throw IoError("missing provenance line: " + path);

  LoadedDataset out;
  if (line.find("dataset=gaussian_blobs") != std::string::npos) {
    out.kind = SourceKind::kGaussianBlobs;
    const auto pos = line.find("dims=");
    if (pos == std::string::npos) throw IoError("dataset header missing dims");
    out.feature_dim = std::stoi(line.substr(pos + 5));
  } else if (line.find("dataset=synthetic_sequences") != std::string::npos) {
    out.kind = SourceKind::kSyntheticSequences;
    const auto pos = line.find("classes=");
    if (pos == std::string::npos) throw IoError("dataset header missing classes");
    out.feature_dim = std::stoi(line.substr(pos + 8));
  } else {
    throw IoError("unknown dataset kind in header: " + path);
  }

  if (!std::getline(f, line)) throw IoError("missing column header: " + path);
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> fields = detail::csv_split(line);
    if (fields.size() != 2) throw IoError("bad dataset row: " + line);
    Example ex;
    ex.label = std::stoi(fields[0]);
    const std::vector<std::string> parts = detail::split_on(fields[1], ';');
    if (out.kind == SourceKind::kGaussianBlobs) {
      std::vector<double> feat;
      feat.reserve(parts.size());
      for (const std::string& p : parts) feat.push_back(std::stod(p));
      if (static_cast<int>(feat.size()) != out.feature_dim)
        throw IoError("dataset row has wrong feature dimension");
      ex.steps.push_back(std::move(feat));
    } else {
      for (const std::string& p : parts) ex.tokens.push_back(std::stoi(p));
      ex.steps.assign(ex.tokens.size(),
                      std::vector<double>(out.feature_dim, 0.0));
      for (std::size_t t = 0; t < ex.tokens.size(); ++t) {
        if (ex.tokens[t] < 0 || ex.tokens[t] >= out.feature_dim)
          throw IoError("dataset token out of range");
        ex.steps[t][ex.tokens[t]] = 1.0;
      }
    }
    out.data.push_back(std::move(ex));
  }
  return out;
}

// Query CSV: one payload per row (no label column, no header requirement
// beyond optional comment lines).
inline std::vector<Example> load_queries(const std::string& path,
                                         const ModelSpec& spec) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open: " + path);
  std::vector<Example> out;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (line == "payload") continue;
    const std::vector<std::string> parts = detail::split_on(
        detail::csv_split(line)[0], ';');
    Example ex;
    if (spec.kind == ModelKind::kFeedForward) {
      std::vector<double> feat;
      feat.reserve(parts.size());
      for (const std::string& p : parts) feat.push_back(std::stod(p));
      if (static_cast<int>(feat.size()) != spec.layer_dims.front())
        throw IoError("query row has wrong feature dimension");
      ex.steps.push_back(std::move(feat));
    } else {
      for (const std::string& p : parts) {
        const int tok = std::stoi(p);
        if (tok < 0 || tok >= spec.input_dim)
          throw IoError("query token out of range");
        ex.tokens.push_back(tok);
      }
      ex.steps.assign(ex.tokens.size(), std::vector<double>(spec.input_dim, 0.0));
      for (std::size_t t = 0; t < ex.tokens.size(); ++t)
        ex.steps[t][ex.tokens[t]] = 1.0;
    }
    out.push_back(std::move(ex));
  }
  return out;
}

}  // namespace privaudit

#endif  // PRIVAUDIT_IO_HPP
