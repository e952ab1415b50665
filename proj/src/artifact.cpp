/*
 * Copyright 2026 The plumestack Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "plumestack/artifact.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <functional>

namespace plumestack {

namespace {

constexpr char kMagic[8] = {'P', 'L', 'M', 'S', 'T', 'A', 'C', 'K'};

// Little-endian encoder. With a sink, bytes are handed over in chunks instead
// of accumulating in memory.
class Writer {
 public:
  using Sink = std::function<void(std::string_view)>;

  Writer() = default;
  explicit Writer(Sink sink) : sink_(std::move(sink)) {}

  void u8(std::uint8_t v) {
    buf_.push_back(static_cast<char>(v));
    if (sink_ && buf_.size() >= kChunk) flush();
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
  void s32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void boolean(bool v) { u8(v ? 1 : 0); }
  void str(const std::string& s) {
    u64(s.size());
    buf_.append(s);
    if (sink_ && buf_.size() >= kChunk) flush();
  }
  void opt_int(const std::optional<int>& v) {
    boolean(v.has_value());
    if (v) i64(*v);
  }
  void vec(const Vector& v) {
    i64(v.size());
    for (Index i = 0; i < v.size(); ++i) f64(v[i]);
  }
  void mat(const Matrix& m) {
    i64(m.rows());
    i64(m.cols());
    for (Index i = 0; i < m.size(); ++i) f64(m.data()[i]);
  }
  void reals(const std::vector<double>& v) {
    u64(v.size());
    for (const double x : v) f64(x);
  }
  void ints(const std::vector<int>& v) {
    u64(v.size());
    for (const int x : v) i64(x);
  }
  void strings(const std::vector<std::string>& v) {
    u64(v.size());
    for (const auto& s : v) str(s);
  }
  std::string& bytes() { return buf_; }
  void flush() {
    if (!sink_ || buf_.empty()) return;
    sink_(buf_);
    buf_.clear();
  }

 private:
  static constexpr std::size_t kChunk = std::size_t{1} << 20;
  Sink sink_;
  std::string buf_;
};

class Reader {
 public:
  explicit Reader(std::string_view data) : data_(data) {}

  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(data_[pos_++]);
  }
  std::uint32_t u32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(u8()) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(u8()) << (8 * i);
    return v;
  }
  std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
  int i32() {
    const auto v = i64();
    if (v < INT32_MIN || v > INT32_MAX) throw DataError("artifact: integer out of range");
    return static_cast<int>(v);
  }
  std::int32_t s32() { return static_cast<std::int32_t>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }
  bool boolean() {
    const auto v = u8();
    if (v > 1) throw DataError("artifact: invalid boolean");
    return v == 1;
  }
  std::size_t count(std::size_t item_size = 1) {
    const auto n = u64();
    if (n > (data_.size() - pos_) / std::max<std::size_t>(item_size, 1)) {
      throw DataError("artifact: length field exceeds payload");
    }
    return static_cast<std::size_t>(n);
  }
  std::string str() {
    const auto n = count();
    std::string s(data_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  std::optional<int> opt_int() {
    if (!boolean()) return std::nullopt;
    return i32();
  }
  Vector vec() {
    const auto n = i64();
    if (n < 0 || static_cast<std::uint64_t>(n) > (data_.size() - pos_) / 8) {
      throw DataError("artifact: vector length exceeds payload");
    }
    Vector v(n);
    for (Index i = 0; i < n; ++i) v[i] = f64();
    return v;
  }
  Matrix mat() {
    const auto rows = i64();
    const auto cols = i64();
    if (rows < 0 || cols < 0 ||
        (cols > 0 && static_cast<std::uint64_t>(rows) > (data_.size() - pos_) / 8 /
                                                             static_cast<std::uint64_t>(cols))) {
      throw DataError("artifact: matrix size exceeds payload");
    }
    Matrix m(rows, cols);
    for (Index i = 0; i < m.size(); ++i) m.data()[i] = f64();
    return m;
  }
  std::vector<double> reals() {
    std::vector<double> v(count(8));
    for (auto& x : v) x = f64();
    return v;
  }
  std::vector<int> ints() {
    std::vector<int> v(count(8));
    for (auto& x : v) x = i32();
    return v;
  }
  std::vector<std::string> strings() {
    std::vector<std::string> v(count(8));
    for (auto& s : v) s = str();
    return v;
  }
  bool done() const { return pos_ == data_.size(); }

 private:
  void need(std::size_t n) const {
    if (data_.size() - pos_ < n) throw DataError("artifact: payload ends early");
  }
  std::string_view data_;
  std::size_t pos_ = 0;
};

// --- model pieces ----------------------------------------------------------

void write_spec(Writer& w, const ModelSpec& s) {
  w.str(s.name);
  w.u8(static_cast<std::uint8_t>(s.family));
  w.u8(static_cast<std::uint8_t>(s.task));
  const auto& hp = s.hp;
  w.opt_int(hp.max_depth);
  w.i64(hp.min_samples_split);
  w.i64(hp.min_samples_leaf);
  w.i64(hp.n_estimators);
  w.boolean(hp.criterion.has_value());
  if (hp.criterion) w.u8(static_cast<std::uint8_t>(*hp.criterion));
  w.opt_int(hp.max_leaf_nodes);
  w.i64(hp.max_features);
  w.boolean(hp.bootstrap);
  w.i64(hp.num_boost_round);
  w.f64(hp.learning_rate);
  w.i64(hp.num_leaves);
  w.f64(hp.feature_fraction);
  w.i64(hp.min_data_in_leaf);
  w.boolean(hp.extra_trees);
  w.i64(hp.k_neighbors);
  w.u8(static_cast<std::uint8_t>(hp.weights));
  w.u64(s.seed);
}

template <typename Enum>
Enum read_enum(Reader& r, int count, const char* what) {
  const auto v = r.u8();
  if (v >= count) throw DataError(std::string("artifact: invalid ") + what);
  return static_cast<Enum>(v);
}

ModelSpec read_spec(Reader& r) {
  ModelSpec s;
  s.name = r.str();
  s.family = read_enum<Family>(r, 5, "family");
  s.task = read_enum<Task>(r, 2, "task");
  auto& hp = s.hp;
  hp.max_depth = r.opt_int();
  hp.min_samples_split = r.i32();
  hp.min_samples_leaf = r.i32();
  hp.n_estimators = r.i32();
  if (r.boolean()) hp.criterion = read_enum<Criterion>(r, 3, "criterion");
  hp.max_leaf_nodes = r.opt_int();
  hp.max_features = r.i32();
  hp.bootstrap = r.boolean();
  hp.num_boost_round = r.i32();
  hp.learning_rate = r.f64();
  hp.num_leaves = r.i32();
  hp.feature_fraction = r.f64();
  hp.min_data_in_leaf = r.i32();
  hp.extra_trees = r.boolean();
  hp.k_neighbors = r.i32();
  hp.weights = read_enum<KnnWeights>(r, 2, "knn weights");
  s.seed = r.u64();
  return s;
}

void write_trees(Writer& w, const std::vector<Tree>& trees) {
  w.u64(trees.size());
  for (const auto& t : trees) {
    w.u64(t.nodes.size());
    for (const auto& n : t.nodes) {
      w.s32(n.feature);
      w.f64(n.threshold);
      w.s32(n.left);
      w.s32(n.right);
      w.f64(n.value);
      w.s32(n.n_samples);
    }
  }
}

std::vector<Tree> read_trees(Reader& r, Index n_features) {
  std::vector<Tree> trees(r.count(8));
  for (auto& t : trees) {
    t.nodes.resize(r.count(32));
    const int n = static_cast<int>(t.nodes.size());
    if (n == 0) throw DataError("artifact: empty tree");
    for (int i = 0; i < n; ++i) {
      auto& node = t.nodes[static_cast<std::size_t>(i)];
      node.feature = r.s32();
      node.threshold = r.f64();
      node.left = r.s32();
      node.right = r.s32();
      node.value = r.f64();
      node.n_samples = r.s32();
      // Children must point forward so prediction always terminates.
      if (!node.is_leaf() && (node.feature >= n_features || node.left <= i || node.right <= i ||
                              node.left >= n || node.right >= n)) {
        throw DataError("artifact: malformed tree node");
      }
    }
  }
  return trees;
}

void write_model(Writer& w, const FittedModel& m) {
  write_spec(w, m.spec());
  w.i64(m.n_features());
  const auto& state = m.state();
  w.u8(static_cast<std::uint8_t>(state.index()));
  if (const auto* f = std::get_if<ForestState>(&state)) {
    write_trees(w, f->trees);
  } else if (const auto* b = std::get_if<BoostState>(&state)) {
    w.f64(b->init);
    w.f64(b->initial_loss);
    w.reals(b->train_loss);
    write_trees(w, b->trees);
  } else {
    const auto& k = std::get<NeighborState>(state);
    w.mat(k.points);
    w.vec(k.targets);
  }
}

FittedModel read_model(Reader& r) {
  ModelSpec spec = read_spec(r);
  const Index n_features = r.i64();
  if (n_features < 0) throw DataError("artifact: negative feature count");
  const auto kind = r.u8();
  FittedModel::State state;
  if (kind == 0) {
    state = ForestState{read_trees(r, n_features)};
  } else if (kind == 1) {
    BoostState b;
    b.init = r.f64();
    b.initial_loss = r.f64();
    b.train_loss = r.reals();
    b.trees = read_trees(r, n_features);
    state = std::move(b);
  } else if (kind == 2) {
    NeighborState k;
    k.points = r.mat();
    k.targets = r.vec();
    if (k.points.cols() != n_features || k.points.rows() != k.targets.size()) {
      throw DataError("artifact: inconsistent neighbor state");
    }
    state = std::move(k);
  } else {
    throw DataError("artifact: unknown model state");
  }
  return FittedModel(std::move(spec), n_features, std::move(state));
}

void write_ensemble(Writer& w, const WeightedEnsemble& e) {
  w.u64(e.weights.size());
  std::uint64_t nonzero = 0;
  for (const double x : e.weights) nonzero += x > 0.0 ? 1 : 0;
  w.u64(nonzero);
  for (std::size_t i = 0; i < e.weights.size(); ++i) {
    if (e.weights[i] > 0.0) {
      w.u64(i);
      w.f64(e.weights[i]);
      w.i64(e.counts[i]);
    }
  }
  w.i64(e.iterations);
  w.i64(e.ensemble_size);
  w.str(e.metric);
  w.f64(e.score);
  w.reals(e.trajectory);
  w.ints(e.selection);
}

WeightedEnsemble read_ensemble(Reader& r) {
  WeightedEnsemble e;
  const auto m = r.count();
  const auto nonzero = r.u64();
  if (nonzero > m) throw DataError("artifact: bad ensemble weights");
  e.weights.assign(m, 0.0);
  e.counts.assign(m, 0);
  for (std::uint64_t i = 0; i < nonzero; ++i) {
    const auto idx = r.u64();
    if (idx >= m) throw DataError("artifact: ensemble member index out of range");
    e.weights[idx] = r.f64();
    e.counts[idx] = r.i32();
  }
  e.iterations = r.i32();
  e.ensemble_size = r.i32();
  e.metric = r.str();
  e.score = r.f64();
  e.trajectory = r.reals();
  e.selection = r.ints();
  return e;
}

void write_stack(Writer& w, const StackedEnsemble& s) {
  w.u8(static_cast<std::uint8_t>(s.task));
  w.strings(s.feature_names);
  w.u64(s.layers.size());
  for (std::size_t l = 0; l < s.layers.size(); ++l) {
    w.u64(s.layers[l].size());
    for (const auto& bag : s.layers[l]) {
      write_spec(w, bag.spec);
      w.u64(bag.fold_models.size());
      for (const auto& m : bag.fold_models) write_model(w, m);
      w.vec(bag.oof);
    }
    write_ensemble(w, s.layer_ensembles[l]);
  }
  w.i64(s.folds.n_rows);
  w.i64(s.folds.k);
  w.u64(s.folds.seed);
  w.boolean(s.folds.stratified);
  w.ints(s.folds.fold_of_row);
}

StackedEnsemble read_stack(Reader& r) {
  StackedEnsemble s;
  s.task = read_enum<Task>(r, 2, "task");
  s.feature_names = r.strings();
  const auto n_layers = r.count();
  if (n_layers == 0) throw DataError("artifact: stack without layers");
  for (std::size_t l = 0; l < n_layers; ++l) {
    std::vector<BaggedModel> members(r.count());
    if (members.empty()) throw DataError("artifact: empty stack layer");
    const auto width = static_cast<Index>(s.feature_names.size() +
                                          (l == 0 ? 0 : s.layers.back().size()));
    for (auto& bag : members) {
      bag.spec = read_spec(r);
      bag.fold_models.resize(r.count());
      if (bag.fold_models.empty()) throw DataError("artifact: bagged model without folds");
      for (auto& m : bag.fold_models) {
        m = read_model(r);
        if (m.n_features() != width) throw DataError("artifact: member feature count mismatch");
      }
      bag.oof = r.vec();
    }
    auto ens = read_ensemble(r);
    if (ens.weights.size() != members.size()) {
      throw DataError("artifact: ensemble size does not match its layer");
    }
    s.layers.push_back(std::move(members));
    s.layer_ensembles.push_back(std::move(ens));
  }
  s.folds.n_rows = r.i64();
  s.folds.k = r.i32();
  s.folds.seed = r.u64();
  s.folds.stratified = r.boolean();
  s.folds.fold_of_row = r.ints();
  return s;
}

std::uint32_t crc_update(std::uint32_t previous, std::string_view payload) {
  uLong crc = previous;
  // zlib takes uInt lengths; feed large payloads in pieces.
  std::size_t offset = 0;
  while (offset < payload.size()) {
    const auto piece = static_cast<uInt>(std::min<std::size_t>(payload.size() - offset, 1u << 30));
    crc = crc32(crc, reinterpret_cast<const Bytef*>(payload.data() + offset), piece);
    offset += piece;
  }
  return static_cast<std::uint32_t>(crc);
}

std::uint32_t crc_of(std::string_view payload) {
  return crc_update(static_cast<std::uint32_t>(crc32(0L, Z_NULL, 0)), payload);
}

constexpr std::size_t kHeaderSize = sizeof(kMagic) + 4 + 8;

std::string header_bytes(std::uint32_t version, std::uint64_t payload_size) {
  Writer h;
  h.bytes().append(kMagic, sizeof(kMagic));
  h.u32(version);
  h.u64(payload_size);
  return std::move(h.bytes());
}

// Streams the payload through `sink`; returns its size and CRC.
std::pair<std::uint64_t, std::uint32_t> write_payload(const ModelArtifact& a,
                                                      const Writer::Sink& sink) {
  std::uint64_t size = 0;
  auto crc = static_cast<std::uint32_t>(crc32(0L, Z_NULL, 0));
  Writer p([&](std::string_view chunk) {
    size += chunk.size();
    crc = crc_update(crc, chunk);
    sink(chunk);
  });
  p.u8(static_cast<std::uint8_t>(a.task));
  p.str(a.preset);
  p.strings(a.feature_names);
  p.str(a.target_name);
  p.boolean(a.standardizer.has_value());
  if (a.standardizer) {
    p.strings(a.standardizer->columns());
    for (const auto& st : a.standardizer->stats()) {
      p.f64(st.mean);
      p.f64(st.std);
    }
  }
  write_stack(p, a.stack);
  p.u64(a.master_seed);
  p.u64(a.data_fingerprint);
  p.u64(a.validation.size());
  for (const auto& [label, value] : a.validation) {
    p.str(label);
    p.f64(value);
  }

  p.flush();
  return {size, crc};
}

}  // namespace

std::string serialize_artifact(const ModelArtifact& a) {
  std::string out = header_bytes(a.format_version, 0);
  const auto [size, crc] = write_payload(a, [&out](std::string_view chunk) { out.append(chunk); });
  out.replace(0, kHeaderSize, header_bytes(a.format_version, size));
  Writer tail;
  tail.u32(crc);
  out.append(tail.bytes());
  return out;
}

ModelArtifact deserialize_artifact(const std::string& bytes) {
  constexpr std::size_t header = kHeaderSize;
  if (bytes.size() < header + 4 || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw DataError("not a plumestack artifact (bad magic or too short)");
  }
  Reader head(std::string_view(bytes).substr(sizeof(kMagic), 12));
  const auto version = head.u32();
  if (version != kArtifactVersion) {
    throw DataError("unsupported artifact version " + std::to_string(version) + " (expected " +
                    std::to_string(kArtifactVersion) + ")");
  }
  const auto length = head.u64();
  if (length != bytes.size() - header - 4) {
    throw DataError("artifact checksum failure: length field does not match file size");
  }
  const std::string_view payload = std::string_view(bytes).substr(header, length);
  Reader tail(std::string_view(bytes).substr(header + length, 4));
  if (tail.u32() != crc_of(payload)) throw DataError("artifact checksum failure");

  Reader r(payload);
  ModelArtifact a;
  a.format_version = version;
  a.task = read_enum<Task>(r, 2, "task");
  a.preset = r.str();
  a.feature_names = r.strings();
  a.target_name = r.str();
  if (r.boolean()) {
    auto columns = r.strings();
    std::vector<ColumnStats> stats(columns.size());
    for (auto& st : stats) {
      st.mean = r.f64();
      st.std = r.f64();
    }
    a.standardizer = Standardizer(std::move(columns), std::move(stats));
  }
  a.stack = read_stack(r);
  a.master_seed = r.u64();
  a.data_fingerprint = r.u64();
  const auto n_validation = r.count();
  for (std::size_t i = 0; i < n_validation; ++i) {
    auto label = r.str();
    a.validation[label] = r.f64();
  }
  if (!r.done()) throw DataError("artifact: trailing bytes in payload");
  return a;
}

void save_artifact(const std::filesystem::path& path, const ModelArtifact& artifact) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    const auto write = [&out](std::string_view bytes) {
      out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    };
    write(header_bytes(artifact.format_version, 0));
    const auto [size, crc] = write_payload(artifact, write);
    Writer tail;
    tail.u32(crc);
    write(tail.bytes());
    out.seekp(0);
    write(header_bytes(artifact.format_version, size));
    if (!out) throw DataError("write failed for '" + path.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

ModelArtifact load_artifact(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw DataError("cannot open artifact '" + path.string() + "'");
  std::string bytes(static_cast<std::size_t>(in.tellg()), '\0');
  in.seekg(0);
  in.read(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!in) throw DataError("cannot read artifact '" + path.string() + "'");
  return deserialize_artifact(bytes);
}

Vector predict_model_space(const ModelArtifact& artifact, const Dataset& ds) {
  for (const auto& name : artifact.feature_names) {
    if (!ds.has_column(name)) {
      throw DataError("input lacks feature column '" + name + "' required by the model");
    }
  }
  Matrix X = ds.feature_matrix(artifact.feature_names);
  if (artifact.standardizer) {
    for (std::size_t c = 0; c < artifact.feature_names.size(); ++c) {
      X.col(static_cast<Index>(c)) =
          artifact.standardizer->apply_column(artifact.feature_names[c], X.col(static_cast<Index>(c)));
    }
  }
  return artifact.stack.predict(X);
}

Vector predict_physical(const ModelArtifact& artifact, const Dataset& ds) {
  Vector pred = predict_model_space(artifact, ds);
  if (artifact.standardizer && artifact.task == Task::regression) {
    pred = artifact.standardizer->invert_column(artifact.target_name, pred);
  }
  return pred;
}

}  // namespace plumestack
