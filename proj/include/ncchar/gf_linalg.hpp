#pragma once

// Exact arithmetic over prime fields GF(p) and dense matrices over them.

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ncchar {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionError : Error {
  using Error::Error;
};

struct SingularMatrixError : Error {
  using Error::Error;
};

/// A prime p < 2^31. Residues are stored as uint32_t; products fit in 64 bits.
class PrimeModulus {
public:
  explicit PrimeModulus(std::int64_t p) : p_(static_cast<std::uint32_t>(p)) {
    if (p < 2 || p >= (std::int64_t{1} << 31) || !is_prime(p))
      throw Error("modulus " + std::to_string(p) + " is not a prime below 2^31");
  }

  std::uint32_t value() const noexcept { return p_; }

  static bool is_prime(std::int64_t n) noexcept {
    if (n < 2) return false;
    for (std::int64_t d = 2; d * d <= n; ++d)
      if (n % d == 0) return false;
    return true;
  }

  std::uint32_t reduce(std::int64_t x) const noexcept {
    std::int64_t r = x % static_cast<std::int64_t>(p_);
    return static_cast<std::uint32_t>(r < 0 ? r + p_ : r);
  }
  std::uint32_t add(std::uint32_t a, std::uint32_t b) const noexcept {
    std::uint64_t s = std::uint64_t{a} + b;
    return static_cast<std::uint32_t>(s >= p_ ? s - p_ : s);
  }
  std::uint32_t sub(std::uint32_t a, std::uint32_t b) const noexcept {
    return a >= b ? a - b : static_cast<std::uint32_t>(std::uint64_t{a} + p_ - b);
  }
  std::uint32_t neg(std::uint32_t a) const noexcept { return a == 0 ? 0 : p_ - a; }
  std::uint32_t mul(std::uint32_t a, std::uint32_t b) const noexcept {
    return static_cast<std::uint32_t>(std::uint64_t{a} * b % p_);
  }

  /// Inverse of a nonzero residue (extended Euclid).
  std::uint32_t inv(std::uint32_t a) const {
    if (a % p_ == 0) throw SingularMatrixError("zero has no inverse in GF(" + std::to_string(p_) + ")");
    std::int64_t t = 0, new_t = 1, r = p_, new_r = a % p_;
    while (new_r != 0) {
      std::int64_t quot = r / new_r;
      t -= quot * new_t;
      std::swap(t, new_t);
      r -= quot * new_r;
      std::swap(r, new_r);
    }
    return reduce(t);
  }

  friend bool operator==(const PrimeModulus&, const PrimeModulus&) = default;

private:
  std::uint32_t p_;
};

/// Dense row-major matrix over GF(p). Entries are canonical residues in [0, p).
class FieldMatrix {
public:
  FieldMatrix(std::size_t rows, std::size_t cols, PrimeModulus mod)
      : rows_(rows), cols_(cols), mod_(mod), data_(rows * cols, 0) {}

  /// Builds from signed integer rows; entries are reduced mod p.
  FieldMatrix(const std::vector<std::vector<std::int64_t>>& rows, PrimeModulus mod)
      : rows_(rows.size()), cols_(rows.empty() ? 0 : rows.front().size()), mod_(mod) {
    data_.reserve(rows_ * cols_);
    for (const auto& row : rows) {
      if (row.size() != cols_) throw DimensionError("ragged matrix literal");
      for (auto x : row) data_.push_back(mod.reduce(x));
    }
  }

  static FieldMatrix zero(std::size_t rows, std::size_t cols, PrimeModulus mod) {
    return FieldMatrix(rows, cols, mod);
  }
  static FieldMatrix identity(std::size_t n, PrimeModulus mod) {
    FieldMatrix m(n, n, mod);
    for (std::size_t i = 0; i < n; ++i) m.set(i, i, 1);
    return m;
  }
  /// rows x 1 column with a single one at `index`.
  static FieldMatrix unit_column(std::size_t rows, std::size_t index, PrimeModulus mod) {
    FieldMatrix m(rows, 1, mod);
    m.set(index, 0, 1);
    return m;
  }
  /// 1 x cols row with a single one at `index`.
  static FieldMatrix unit_row(std::size_t cols, std::size_t index, PrimeModulus mod) {
    FieldMatrix m(1, cols, mod);
    m.set(0, index, 1);
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  const PrimeModulus& modulus() const noexcept { return mod_; }
  std::span<const std::uint32_t> entries() const noexcept { return data_; }

  std::uint32_t operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  std::uint32_t at(std::size_t r, std::size_t c) const {
    if (r >= rows_ || c >= cols_) throw DimensionError("matrix index out of range");
    return data_[r * cols_ + c];
  }
  void set(std::size_t r, std::size_t c, std::int64_t v) { data_[r * cols_ + c] = mod_.reduce(v); }

  std::span<const std::uint32_t> row(std::size_t r) const {
    return std::span<const std::uint32_t>(data_).subspan(r * cols_, cols_);
  }

  bool is_zero() const noexcept {
    for (auto x : data_)
      if (x != 0) return false;
    return true;
  }
  bool is_identity() const noexcept {
    if (rows_ != cols_) return false;
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t c = 0; c < cols_; ++c)
        if ((*this)(r, c) != (r == c ? 1u : 0u)) return false;
    return true;
  }

  FieldMatrix scaled(std::int64_t factor) const {
    FieldMatrix out = *this;
    auto f = mod_.reduce(factor);
    for (auto& x : out.data_) x = mod_.mul(x, f);
    return out;
  }

  FieldMatrix transposed() const {
    FieldMatrix out(cols_, rows_, mod_);
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t c = 0; c < cols_; ++c) out.data_[c * rows_ + r] = (*this)(r, c);
    return out;
  }

  std::vector<std::vector<std::int64_t>> to_rows() const {
    std::vector<std::vector<std::int64_t>> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r].assign(row(r).begin(), row(r).end());
    return out;
  }

  friend bool operator==(const FieldMatrix&, const FieldMatrix&) = default;

  friend std::ostream& operator<<(std::ostream& os, const FieldMatrix& m) {
    os << '[';
    for (std::size_t r = 0; r < m.rows_; ++r) {
      os << (r ? ",[" : "[");
      for (std::size_t c = 0; c < m.cols_; ++c) os << (c ? "," : "") << m(r, c);
      os << ']';
    }
    return os << "] mod " << m.mod_.value();
  }

private:
  friend FieldMatrix mat_add(const FieldMatrix&, const FieldMatrix&);
  friend FieldMatrix mat_mul(const FieldMatrix&, const FieldMatrix&);

  std::size_t rows_;
  std::size_t cols_;
  PrimeModulus mod_;
  std::vector<std::uint32_t> data_;
};

inline void require_same_modulus(const FieldMatrix& a, const FieldMatrix& b) {
  if (!(a.modulus() == b.modulus()))
    throw DimensionError("modulus mismatch: GF(" + std::to_string(a.modulus().value()) + ") vs GF(" +
                         std::to_string(b.modulus().value()) + ")");
}

inline FieldMatrix mat_add(const FieldMatrix& a, const FieldMatrix& b) {
  require_same_modulus(a, b);
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionError("mat_add: shape mismatch");
  FieldMatrix out = a;
  for (std::size_t i = 0; i < out.data_.size(); ++i) out.data_[i] = a.mod_.add(a.data_[i], b.data_[i]);
  return out;
}

inline FieldMatrix mat_sub(const FieldMatrix& a, const FieldMatrix& b) { return mat_add(a, b.scaled(-1)); }

inline FieldMatrix mat_mul(const FieldMatrix& a, const FieldMatrix& b) {
  require_same_modulus(a, b);
  if (a.cols() != b.rows())
    throw DimensionError("mat_mul: " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + " times " +
                         std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  const auto& mod = a.mod_;
  const std::uint64_t p = mod.value();
  FieldMatrix out(a.rows(), b.cols(), mod);
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < b.cols(); ++c) {
      std::uint64_t acc = 0;
      for (std::size_t i = 0; i < a.cols(); ++i) {
        acc += std::uint64_t{a.data_[r * a.cols() + i]} * b.data_[i * b.cols() + c];
        // keep below 2^63 even for p close to 2^31
        if (acc >= (std::uint64_t{1} << 62)) acc %= p;
      }
      out.data_[r * out.cols() + c] = static_cast<std::uint32_t>(acc % p);
    }
  return out;
}

inline FieldMatrix operator+(const FieldMatrix& a, const FieldMatrix& b) { return mat_add(a, b); }
inline FieldMatrix operator-(const FieldMatrix& a, const FieldMatrix& b) { return mat_sub(a, b); }
inline FieldMatrix operator*(const FieldMatrix& a, const FieldMatrix& b) { return mat_mul(a, b); }

struct RowEchelon {
  FieldMatrix reduced;               // reduced row echelon form
  std::vector<std::size_t> pivots;   // pivot column of each nonzero row
};

/// Gauss-Jordan elimination with first-nonzero pivoting, columns scanned left to right.
inline RowEchelon rref(FieldMatrix m) {
  const auto mod = m.modulus();
  std::vector<std::size_t> pivots;
  std::size_t pivot_row = 0;
  for (std::size_t col = 0; col < m.cols() && pivot_row < m.rows(); ++col) {
    std::size_t found = m.rows();
    for (std::size_t r = pivot_row; r < m.rows(); ++r)
      if (m(r, col) != 0) {
        found = r;
        break;
      }
    if (found == m.rows()) continue;
    if (found != pivot_row)
      for (std::size_t c = 0; c < m.cols(); ++c) {
        auto tmp = m(found, c);
        m.set(found, c, m(pivot_row, c));
        m.set(pivot_row, c, tmp);
      }
    auto scale = mod.inv(m(pivot_row, col));
    for (std::size_t c = col; c < m.cols(); ++c) m.set(pivot_row, c, mod.mul(m(pivot_row, c), scale));
    for (std::size_t r = 0; r < m.rows(); ++r) {
      if (r == pivot_row || m(r, col) == 0) continue;
      auto factor = m(r, col);
      for (std::size_t c = col; c < m.cols(); ++c)
        m.set(r, c, mod.sub(m(r, c), mod.mul(factor, m(pivot_row, c))));
    }
    pivots.push_back(col);
    ++pivot_row;
  }
  return {std::move(m), std::move(pivots)};
}

inline std::size_t rank(const FieldMatrix& a) { return rref(a).pivots.size(); }

/// Horizontal concatenation [a | b].
inline FieldMatrix hconcat(const FieldMatrix& a, const FieldMatrix& b) {
  require_same_modulus(a, b);
  if (a.rows() != b.rows()) throw DimensionError("hconcat: row count mismatch");
  FieldMatrix out(a.rows(), a.cols() + b.cols(), a.modulus());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    for (std::size_t c = 0; c < a.cols(); ++c) out.set(r, c, a(r, c));
    for (std::size_t c = 0; c < b.cols(); ++c) out.set(r, a.cols() + c, b(r, c));
  }
  return out;
}

inline FieldMatrix inverse(const FieldMatrix& a) {
  if (a.rows() != a.cols()) throw DimensionError("inverse: matrix is not square");
  const std::size_t n = a.rows();
  auto ech = rref(hconcat(a, FieldMatrix::identity(n, a.modulus())));
  if (ech.pivots.size() < n || ech.pivots[n - 1] >= n) throw SingularMatrixError("inverse: matrix is singular");
  FieldMatrix out(n, n, a.modulus());
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) out.set(r, c, ech.reduced(r, n + c));
  return out;
}

/// Some X with a*X = b, or nullopt when the system is inconsistent. Free variables are set to zero.
inline std::optional<FieldMatrix> solve_right(const FieldMatrix& a, const FieldMatrix& b) {
  require_same_modulus(a, b);
  if (a.rows() != b.rows()) throw DimensionError("solve_right: row count mismatch");
  auto ech = rref(hconcat(a, b));
  FieldMatrix x(a.cols(), b.cols(), a.modulus());
  for (std::size_t r = 0; r < ech.pivots.size(); ++r) {
    auto col = ech.pivots[r];
    if (col >= a.cols()) return std::nullopt;
    for (std::size_t c = 0; c < b.cols(); ++c) x.set(col, c, ech.reduced(r, a.cols() + c));
  }
  return x;
}

using BlockGrid = std::vector<std::vector<FieldMatrix>>;

/// Flattens a grid of blocks. Every block in a grid row shares a height; every block in a grid column a width.
inline FieldMatrix block_compose(const BlockGrid& blocks) {
  if (blocks.empty() || blocks.front().empty()) throw DimensionError("block_compose: empty grid");
  const auto mod = blocks.front().front().modulus();
  const std::size_t grid_cols = blocks.front().size();
  std::vector<std::size_t> widths(grid_cols);
  for (std::size_t j = 0; j < grid_cols; ++j) widths[j] = blocks.front()[j].cols();
  std::size_t total_rows = 0, total_cols = 0;
  for (auto w : widths) total_cols += w;
  for (const auto& row : blocks) {
    if (row.size() != grid_cols) throw DimensionError("block_compose: ragged grid");
    for (std::size_t j = 0; j < grid_cols; ++j) {
      if (!(row[j].modulus() == mod)) throw DimensionError("block_compose: modulus mismatch");
      if (row[j].rows() != row.front().rows() || row[j].cols() != widths[j])
        throw DimensionError("block_compose: inconsistent block shapes");
    }
    total_rows += row.front().rows();
  }
  FieldMatrix out(total_rows, total_cols, mod);
  std::size_t r0 = 0;
  for (const auto& row : blocks) {
    std::size_t c0 = 0;
    for (const auto& block : row) {
      for (std::size_t r = 0; r < block.rows(); ++r)
        for (std::size_t c = 0; c < block.cols(); ++c) out.set(r0 + r, c0 + c, block(r, c));
      c0 += block.cols();
    }
    r0 += row.front().rows();
  }
  return out;
}

inline FieldMatrix vstack(const std::vector<FieldMatrix>& blocks) {
  BlockGrid grid;
  for (const auto& b : blocks) grid.push_back({b});
  return block_compose(grid);
}

inline FieldMatrix hstack(const std::vector<FieldMatrix>& blocks) { return block_compose({blocks}); }

/// True iff a_i * b_j is I_d when i == j and 0 otherwise, for d x dn blocks a_i and dn x d blocks b_j.
inline bool block_identity_check(const std::vector<FieldMatrix>& a_blocks, const std::vector<FieldMatrix>& b_blocks) {
  if (a_blocks.size() != b_blocks.size() || a_blocks.empty())
    throw DimensionError("block_identity_check: block counts differ or are zero");
  const std::size_t n = a_blocks.size();
  const std::size_t d = a_blocks.front().rows();
  for (const auto& a : a_blocks)
    if (a.rows() != d || a.cols() != d * n) throw DimensionError("block_identity_check: A block is not d x dn");
  for (const auto& b : b_blocks)
    if (b.rows() != d * n || b.cols() != d) throw DimensionError("block_identity_check: B block is not dn x d");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      auto prod = a_blocks[i] * b_blocks[j];
      if (i == j ? !prod.is_identity() : !prod.is_zero()) return false;
    }
  return true;
}

}  // namespace ncchar
