#include "subnewton/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include "subnewton/rng.hpp"

namespace subnewton {

void Dataset::validate() const {
  if (labels.size() != rows(features))
    throw std::invalid_argument("Dataset: labels.size() != features.rows");
  for (int y : labels)
    if (y != -1 && y != 1) throw std::invalid_argument("Dataset: label not in {-1,+1}");
}

bool same_content(const Dataset& a, const Dataset& b) {
  return a.labels == b.labels && rows(a.features) == rows(b.features) &&
         cols(a.features) == cols(b.features) && to_dense(a.features) == to_dense(b.features);
}

Dataset select_rows(const Dataset& ds, const std::vector<std::size_t>& rows_wanted) {
  Dataset out;
  out.name = ds.name;
  out.labels.reserve(rows_wanted.size());
  for (std::size_t r : rows_wanted) out.labels.push_back(ds.labels.at(r));

  if (const auto* dense = std::get_if<DenseMatrix>(&ds.features)) {
    DenseMatrix m(rows_wanted.size(), dense->cols());
    for (std::size_t i = 0; i < rows_wanted.size(); ++i) {
      const auto src = dense->row(rows_wanted[i]);
      std::copy(src.begin(), src.end(), m.row(i).begin());
    }
    out.features = std::move(m);
  } else {
    const auto& csr = std::get<CsrMatrix>(ds.features);
    std::vector<std::size_t> offsets{0};
    std::vector<std::size_t> ci;
    std::vector<double> vals;
    for (std::size_t r : rows_wanted) {
      for (std::size_t k = csr.row_offsets()[r]; k < csr.row_offsets()[r + 1]; ++k) {
        ci.push_back(csr.col_indices()[k]);
        vals.push_back(csr.values()[k]);
      }
      offsets.push_back(vals.size());
    }
    out.features = CsrMatrix(rows_wanted.size(), csr.cols(), std::move(offsets), std::move(ci),
                             std::move(vals));
  }
  return out;
}

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r'; }

std::string_view next_token(std::string_view& line) {
  std::size_t b = 0;
  while (b < line.size() && is_space(line[b])) ++b;
  std::size_t e = b;
  while (e < line.size() && !is_space(line[e])) ++e;
  const std::string_view tok = line.substr(b, e - b);
  line.remove_prefix(e);
  return tok;
}

bool parse_double(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

bool parse_index(std::string_view s, std::size_t& out) {
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::vector<int> map_labels(const std::vector<double>& raw) {
  const std::set<double> seen(raw.begin(), raw.end());
  auto subset_of = [&](std::initializer_list<double> allowed) {
    return std::all_of(seen.begin(), seen.end(), [&](double v) {
      return std::find(allowed.begin(), allowed.end(), v) != allowed.end();
    });
  };
  std::vector<int> out;
  out.reserve(raw.size());
  if (subset_of({-1.0, 1.0})) {
    for (double v : raw) out.push_back(v > 0 ? 1 : -1);
  } else if (subset_of({0.0, 1.0})) {
    for (double v : raw) out.push_back(v == 0.0 ? -1 : 1);
  } else if (subset_of({1.0, 2.0})) {
    for (double v : raw) out.push_back(v == 2.0 ? -1 : 1);
  } else {
    std::string msg = "read_libsvm: cannot map label set {";
    for (double v : seen) msg += std::to_string(v) + ",";
    msg.back() = '}';
    throw std::invalid_argument(msg);
  }
  return out;
}

}  // namespace

Dataset read_libsvm(std::istream& in, std::string name) {
  std::vector<double> raw_labels;
  std::vector<std::size_t> offsets{0};
  std::vector<std::size_t> col_indices;
  std::vector<double> values;
  std::size_t num_features = 0;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view rest(line);
    const std::string_view label_tok = next_token(rest);
    if (label_tok.empty()) continue;
    double label = 0.0;
    if (!parse_double(label_tok, label))
      throw ParseError(line_no, "bad label '" + std::string(label_tok) + "'");

    std::size_t prev_index = 0;
    for (std::string_view tok = next_token(rest); !tok.empty(); tok = next_token(rest)) {
      const std::size_t colon = tok.find(':');
      if (colon == std::string_view::npos)
        throw ParseError(line_no, "expected <index>:<value>, got '" + std::string(tok) + "'");
      std::size_t index = 0;
      double value = 0.0;
      if (!parse_index(tok.substr(0, colon), index) || index == 0)
        throw ParseError(line_no, "bad feature index in '" + std::string(tok) + "'");
      if (!parse_double(tok.substr(colon + 1), value))
        throw ParseError(line_no, "bad feature value in '" + std::string(tok) + "'");
      if (index <= prev_index) throw ParseError(line_no, "feature indices not ascending");
      prev_index = index;
      num_features = std::max(num_features, index);
      if (value != 0.0) {
        col_indices.push_back(index - 1);
        values.push_back(value);
      }
    }
    raw_labels.push_back(label);
    offsets.push_back(values.size());
  }

  Dataset ds;
  ds.name = std::move(name);
  ds.labels = map_labels(raw_labels);
  const std::size_t n = raw_labels.size();
  CsrMatrix csr(n, num_features, std::move(offsets), std::move(col_indices), std::move(values));
  const double cells = static_cast<double>(n) * static_cast<double>(num_features);
  const double density = cells > 0 ? static_cast<double>(csr.nnz()) / cells : 0.0;
  if (density < kSparseDensityThreshold)
    ds.features = std::move(csr);
  else
    ds.features = csr.to_dense();
  return ds;
}

Dataset read_libsvm(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_libsvm: cannot open " + path.string());
  return read_libsvm(in, path.stem().string());
}

void write_libsvm(std::ostream& out, const Dataset& ds) {
  ds.validate();
  const std::size_t n = ds.num_examples();
  const std::size_t d = ds.num_features();
  const CsrMatrix csr = std::holds_alternative<CsrMatrix>(ds.features)
                            ? std::get<CsrMatrix>(ds.features)
                            : CsrMatrix::from_dense(std::get<DenseMatrix>(ds.features));
  const bool last_col_used =
      d == 0 || std::find(csr.col_indices().begin(), csr.col_indices().end(), d - 1) !=
                    csr.col_indices().end();
  char buf[64];
  for (std::size_t i = 0; i < n; ++i) {
    out << (ds.labels[i] > 0 ? "+1" : "-1");
    for (std::size_t k = csr.row_offsets()[i]; k < csr.row_offsets()[i + 1]; ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", csr.values()[k]);
      out << ' ' << csr.col_indices()[k] + 1 << ':' << buf;
    }
    if (i == 0 && !last_col_used) out << ' ' << d << ":0";
    out << '\n';
  }
}

void write_libsvm(const std::filesystem::path& path, const Dataset& ds) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_libsvm: cannot open " + path.string());
  write_libsvm(out, ds);
}

double synth_feature_scale(std::size_t n, double kappa_target) {
  return std::max(1.0, std::sqrt(40.0 * kappa_target / static_cast<double>(n)));
}

Dataset synth_gen(std::size_t n, std::size_t d, double kappa_target, std::uint64_t seed) {
  if (d < 2) throw std::invalid_argument("synth_gen: d must be >= 2");
  if (n < d) throw std::invalid_argument("synth_gen: n must be >= d");
  if (!(kappa_target >= 1.0)) throw std::invalid_argument("synth_gen: kappa_target must be >= 1");

  const Rng root(seed);

  // Haar-random orthogonal Q via modified Gram-Schmidt on a Gaussian matrix.
  Rng q_rng = root.derive("synth/Q");
  DenseMatrix q(d, d);
  for (double& v : q.entries()) v = q_rng.normal();
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t k = 0; k < j; ++k) {
      double proj = 0.0;
      for (std::size_t i = 0; i < d; ++i) proj += q(i, k) * q(i, j);
      for (std::size_t i = 0; i < d; ++i) q(i, j) -= proj * q(i, k);
    }
    double nrm = 0.0;
    for (std::size_t i = 0; i < d; ++i) nrm += q(i, j) * q(i, j);
    nrm = std::sqrt(nrm);
    for (std::size_t i = 0; i < d; ++i) q(i, j) /= nrm;
  }

  const double c = synth_feature_scale(n, kappa_target);
  const double lo = std::log(1.0 / std::sqrt(kappa_target));
  Vector s(d);
  for (std::size_t j = 0; j < d; ++j)
    s[j] = c * std::exp(lo * (1.0 - static_cast<double>(j) / static_cast<double>(d - 1)));

  // M = diag(s) Q^T, so X = G M.
  DenseMatrix m(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) m(i, j) = s[i] * q(j, i);

  Rng g_rng = root.derive("synth/G");
  DenseMatrix x(n, d);
  Vector g(d);
  for (std::size_t r = 0; r < n; ++r) {
    for (double& v : g) v = g_rng.normal();
    auto row = x.row(r);
    for (std::size_t k = 0; k < d; ++k) axpy(g[k], m.row(k), row);
  }

  Rng w_rng = root.derive("synth/w");
  Vector w_bar(d);
  for (double& v : w_bar) v = w_rng.normal();
  scale(1.0 / norm2(w_bar), w_bar);

  Dataset ds;
  ds.labels.resize(n);
  for (std::size_t r = 0; r < n; ++r) ds.labels[r] = dot(x.row(r), w_bar) >= 0.0 ? 1 : -1;
  Rng flip_rng = root.derive("synth/flip");
  const auto flips = flip_rng.sample_without_replacement(n, n / 20);
  for (std::size_t r : flips) ds.labels[r] = -ds.labels[r];

  ds.features = std::move(x);
  char name[96];
  std::snprintf(name, sizeof name, "synthetic-n%zu-d%zu-k%g", n, d, kappa_target);
  ds.name = name;
  return ds;
}

SplitDataset split(const Dataset& ds, double test_frac, std::uint64_t seed) {
  const std::size_t n = ds.num_examples();
  if (!(test_frac > 0.0 && test_frac < 1.0))
    throw std::invalid_argument("split: test_frac must lie in (0,1)");
  const auto n_test = static_cast<std::size_t>(std::floor(static_cast<double>(n) * test_frac + 1e-9));
  if (n_test < 1 || n_test > n - 1) throw std::invalid_argument("split: degenerate fraction");

  Rng rng = Rng(seed).derive("split");
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  rng.shuffle(perm);

  SplitDataset out;
  out.seed = seed;
  out.train_rows.assign(perm.begin(), perm.end() - static_cast<std::ptrdiff_t>(n_test));
  out.test_rows.assign(perm.end() - static_cast<std::ptrdiff_t>(n_test), perm.end());
  std::sort(out.train_rows.begin(), out.train_rows.end());
  std::sort(out.test_rows.begin(), out.test_rows.end());
  out.train = select_rows(ds, out.train_rows);
  out.test = select_rows(ds, out.test_rows);
  out.train.name = ds.name + "-train";
  out.test.name = ds.name + "-test";
  return out;
}

}  // namespace subnewton
