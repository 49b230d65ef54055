#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "w2s/datagen.hpp"

namespace w2s {
namespace {

static_assert(std::endian::native == std::endian::little, "binary dataset I/O assumes a little-endian host");

constexpr char kMagic[4] = {'W', '2', 'S', 'R'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint64_t kFlagAuxZeta = 1;
constexpr std::uint64_t kFlagPopulation = 2;

template <typename T>
void put(std::string& buf, T value) {
  char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  buf.append(bytes, sizeof(T));
}

void put_doubles(std::string& buf, const double* data, Index count) {
  buf.append(reinterpret_cast<const char*>(data), static_cast<std::size_t>(count) * sizeof(double));
}

class Reader {
 public:
  explicit Reader(std::string bytes) : bytes_(std::move(bytes)) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T value;
    std::memcpy(&value, bytes_.data() + at_, sizeof(T));
    at_ += sizeof(T);
    return value;
  }

  void get_doubles(double* out, Index count) {
    const std::size_t n = static_cast<std::size_t>(count) * sizeof(double);
    need(n);
    std::memcpy(out, bytes_.data() + at_, n);
    at_ += n;
  }

  Vec get_vec(Index n) {
    Vec v(n);
    get_doubles(v.data(), n);
    return v;
  }

  Mat get_mat(Index rows, Index cols) {
    Mat m(rows, cols);
    get_doubles(m.data(), m.size());
    return m;
  }

  std::size_t remaining() const { return bytes_.size() - at_; }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - at_ < n) throw Error(Errc::TruncatedFile, "dataset file ends early");
  }

  std::string bytes_;
  std::size_t at_ = 0;
};

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spill(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::Io, "cannot write '" + path.string() + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::Io, "write failed for '" + path.string() + "'");
}

void check_finite(const Split& s, const char* name) {
  if (!all_finite(s.reps) || !all_finite(s.labels))
    throw Error(Errc::NonFiniteEntry, std::string(name) + " split contains non-finite values");
}

std::filesystem::path sibling(const std::filesystem::path& path, const char* tag) {
  auto out = path;
  out.replace_filename(path.stem().string() + "." + tag + path.extension().string());
  return out;
}

// Population payload: block count, then per block (columns, eigenvalue, basis);
// tail dim and variance; E[ry]; E[y^2]; E[r] length and values; E[y];
// principal basis columns and values; estimated flag.
void put_population(std::string& buf, const PopulationSummary& pop) {
  put<std::uint64_t>(buf, pop.blocks.size());
  for (const auto& b : pop.blocks) {
    put<std::uint64_t>(buf, static_cast<std::uint64_t>(b.basis.cols()));
    put<double>(buf, b.eigenvalue);
    put_doubles(buf, b.basis.data(), b.basis.size());
  }
  put<std::uint64_t>(buf, static_cast<std::uint64_t>(pop.tail_dim));
  put<double>(buf, pop.tail_variance);
  put_doubles(buf, pop.e_ry.data(), pop.e_ry.size());
  put<double>(buf, pop.e_y2);
  put<std::uint64_t>(buf, static_cast<std::uint64_t>(pop.e_r.size()));
  put_doubles(buf, pop.e_r.data(), pop.e_r.size());
  put<double>(buf, pop.e_y);
  put<std::uint64_t>(buf, static_cast<std::uint64_t>(pop.principal_basis.cols()));
  put_doubles(buf, pop.principal_basis.data(), pop.principal_basis.size());
  put<std::uint64_t>(buf, pop.estimated ? 1 : 0);
}

Index get_count(Reader& in, Index d) {
  const auto c = in.get<std::uint64_t>();
  // Every count here indexes columns of a d-row matrix stored in the file.
  if (c > in.remaining() / sizeof(double) / static_cast<std::uint64_t>(d) + 1)
    throw Error(Errc::TruncatedFile, "population block exceeds file size");
  return static_cast<Index>(c);
}

PopulationSummary get_population(Reader& in, Index d) {
  PopulationSummary pop;
  const Index nblocks = get_count(in, 1);
  for (Index i = 0; i < nblocks; ++i) {
    CovBlock b;
    const Index cols = get_count(in, d);
    b.eigenvalue = in.get<double>();
    b.basis = in.get_mat(d, cols);
    pop.blocks.push_back(std::move(b));
  }
  pop.tail_dim = static_cast<Index>(in.get<std::uint64_t>());
  pop.tail_variance = in.get<double>();
  pop.e_ry = in.get_vec(d);
  pop.e_y2 = in.get<double>();
  const Index er = get_count(in, 1);
  if (er != 0 && er != d) throw Error(Errc::DimensionMismatch, "population E[r] has wrong length");
  pop.e_r = in.get_vec(er);
  pop.e_y = in.get<double>();
  pop.principal_basis = in.get_mat(d, get_count(in, d));
  pop.estimated = in.get<std::uint64_t>() != 0;
  return pop;
}

void write_binary(const RepDataset& ds, const std::filesystem::path& path) {
  const Index n_test = ds.test ? ds.test->size() : 0;
  std::string buf;
  buf.reserve(64 + sizeof(double) * static_cast<std::size_t>((ds.dim + 1) * (ds.tilde.size() + ds.hat.size() + n_test) +
                                                             ds.hat.size()));
  buf.append(kMagic, 4);
  put<std::uint32_t>(buf, kVersion);
  put<std::uint64_t>(buf, static_cast<std::uint64_t>(ds.dim));
  put<std::uint64_t>(buf, static_cast<std::uint64_t>(ds.tilde.size()));
  put<std::uint64_t>(buf, static_cast<std::uint64_t>(ds.hat.size()));
  put<std::uint64_t>(buf, static_cast<std::uint64_t>(n_test));
  put<std::uint64_t>(buf, (ds.aux_hat_zeta ? kFlagAuxZeta : 0) | (ds.population ? kFlagPopulation : 0));
  auto put_split = [&buf](const Split& s) {
    put_doubles(buf, s.reps.data(), s.reps.size());
    put_doubles(buf, s.labels.data(), s.labels.size());
  };
  put_split(ds.tilde);
  put_split(ds.hat);
  if (ds.test) put_split(*ds.test);
  if (ds.aux_hat_zeta) put_doubles(buf, ds.aux_hat_zeta->data(), ds.aux_hat_zeta->size());
  if (ds.population) put_population(buf, *ds.population);
  spill(path, buf);
}

RepDataset read_binary(const std::filesystem::path& path) {
  Reader in(slurp(path));
  char magic[4];
  for (char& c : magic) c = in.get<char>();
  if (std::memcmp(magic, kMagic, 4) != 0) throw Error(Errc::BadMagic, "'" + path.string() + "' is not a W2SR file");
  const auto version = in.get<std::uint32_t>();
  if (version != kVersion) throw Error(Errc::VersionMismatch, "unsupported version " + std::to_string(version));
  const auto d = static_cast<Index>(in.get<std::uint64_t>());
  const auto n_tilde = static_cast<Index>(in.get<std::uint64_t>());
  const auto n_hat = static_cast<Index>(in.get<std::uint64_t>());
  const auto n_test = static_cast<Index>(in.get<std::uint64_t>());
  const auto flags = in.get<std::uint64_t>();
  if (d <= 0) throw Error(Errc::DimensionMismatch, "dataset dimension is zero");

  // Reject absurd headers before allocating.
  const double expected = static_cast<double>(d + 1) * static_cast<double>(n_tilde + n_hat + n_test) +
                          ((flags & kFlagAuxZeta) ? static_cast<double>(n_hat) : 0.0);
  if (expected * sizeof(double) > static_cast<double>(in.remaining()))
    throw Error(Errc::TruncatedFile, "dataset file is shorter than its header declares");

  auto get_split = [&in, d](Index n) {
    Split s{Mat(d, n), Vec(n)};
    in.get_doubles(s.reps.data(), s.reps.size());
    in.get_doubles(s.labels.data(), s.labels.size());
    return s;
  };
  RepDataset ds;
  ds.dim = d;
  ds.tilde = get_split(n_tilde);
  ds.hat = get_split(n_hat);
  if (n_test > 0) ds.test = get_split(n_test);
  if (flags & kFlagAuxZeta) {
    Vec zeta(n_hat);
    in.get_doubles(zeta.data(), n_hat);
    ds.aux_hat_zeta = std::move(zeta);
  }
  if (flags & kFlagPopulation) ds.population = get_population(in, d);
  if (in.remaining() != 0) throw Error(Errc::DimensionMismatch, "trailing bytes after dataset payload");
  check_finite(ds.tilde, "tilde");
  check_finite(ds.hat, "hat");
  if (ds.test) check_finite(*ds.test, "test");
  if (ds.aux_hat_zeta && !all_finite(*ds.aux_hat_zeta)) throw Error(Errc::NonFiniteEntry, "aux zeta is non-finite");
  ds.validate();
  return ds;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool parse_double(std::string_view field, double& out) {
  field = trim(field);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, out);
  return ec == std::errc() && ptr == end && !field.empty();
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

}  // namespace

DatasetFormat dataset_format_from_string(const std::string& name) {
  if (name == "binary") return DatasetFormat::binary;
  if (name == "csv") return DatasetFormat::csv;
  throw Error(Errc::ConfigViolation, "unknown dataset format '" + name + "'");
}

void write_split_csv(const Split& split, const std::filesystem::path& path) {
  std::string out;
  char buf[32];
  for (Index j = 0; j < split.size(); ++j) {
    for (Index i = 0; i <= split.dim(); ++i) {
      const double v = i < split.dim() ? split.reps(i, j) : split.labels(j);
      const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
      if (i > 0) out.push_back(',');
      out.append(buf, res.ptr);
    }
    out.push_back('\n');
  }
  spill(path, out);
}

Split read_split_csv(const std::filesystem::path& path) {
  const std::string text = slurp(path);
  std::vector<std::vector<double>> rows;
  std::size_t width = 0;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    const std::string_view line = trim(std::string_view(text).substr(start, end - start));
    start = end + 1;
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    std::vector<double> values(fields.size());
    bool numeric = true;
    for (std::size_t i = 0; i < fields.size(); ++i) numeric = numeric && parse_double(fields[i], values[i]);
    if (!numeric) {
      if (rows.empty() && width == 0) {  // header
        width = fields.size();
        continue;
      }
      throw Error(Errc::Io, path.string() + ":" + std::to_string(line_no) + ": unparseable field");
    }
    if (width == 0) width = fields.size();
    if (fields.size() != width)
      throw Error(Errc::DimensionMismatch, path.string() + ":" + std::to_string(line_no) + ": ragged row");
    for (double v : values)
      if (!std::isfinite(v))
        throw Error(Errc::NonFiniteEntry, path.string() + ":" + std::to_string(line_no) + ": non-finite value");
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw Error(Errc::TruncatedFile, "'" + path.string() + "' has no data rows");
  if (width < 2) throw Error(Errc::DimensionMismatch, "CSV rows need at least one feature and a label");
  const auto d = static_cast<Index>(width - 1);
  const auto n = static_cast<Index>(rows.size());
  Split s{Mat(d, n), Vec(n)};
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < d; ++i) s.reps(i, j) = rows[j][i];
    s.labels(j) = rows[j][d];
  }
  return s;
}

void write_dataset(const RepDataset& ds, const std::filesystem::path& path, DatasetFormat format) {
  ds.validate();
  if (format == DatasetFormat::binary) {
    write_binary(ds, path);
    return;
  }
  write_split_csv(ds.hat, path);
  write_split_csv(ds.tilde, sibling(path, "tilde"));
  if (ds.test) write_split_csv(*ds.test, sibling(path, "test"));
}

RepDataset read_dataset(const std::filesystem::path& path, DatasetFormat format) {
  if (format == DatasetFormat::binary) return read_binary(path);
  RepDataset ds;
  ds.hat = read_split_csv(path);
  ds.dim = ds.hat.dim();
  const auto tilde_path = sibling(path, "tilde");
  ds.tilde = std::filesystem::exists(tilde_path) ? read_split_csv(tilde_path) : ds.hat;
  const auto test_path = sibling(path, "test");
  if (std::filesystem::exists(test_path)) ds.test = read_split_csv(test_path);
  ds.validate();
  return ds;
}

}  // namespace w2s
