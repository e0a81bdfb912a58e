#include "carnot/weights.hpp"
#include "carnot/linalg.hpp"

#include <cmath>
#include <sstream>

namespace carnot {

std::string rat_str(const Rat& x) {
    std::ostringstream os;
    os << numerator(x);
    if (denominator(x) != 1) os << '/' << denominator(x);
    return os.str();
}

Rat rat_parse(const std::string& s) {
    auto is_int = [](const std::string& t) {
        if (t.empty()) return false;
        std::size_t i = (t[0] == '-' || t[0] == '+') ? 1 : 0;
        if (i == t.size()) return false;
        for (; i < t.size(); ++i)
            if (t[i] < '0' || t[i] > '9') return false;
        return true;
    };
    auto slash = s.find('/');
    try {
        if (slash == std::string::npos) {
            if (!is_int(s)) throw InputError("bad rational: '" + s + "'");
            return Rat(Int(s));
        }
        std::string p = s.substr(0, slash), q = s.substr(slash + 1);
        if (!is_int(p) || !is_int(q)) throw InputError("bad rational: '" + s + "'");
        Int num(p), den(q);
        if (den == 0) throw InputError("zero denominator in '" + s + "'");
        return Rat(num, den);
    } catch (const std::exception& e) {
        throw InputError(std::string("bad rational: '") + s + "': " + e.what());
    }
}

double to_double(const Rat& x) { return x.convert_to<double>(); }

std::string point_str(const PointQ& x) {
    std::string out = "(";
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (i) out += ",";
        out += rat_str(x[i]);
    }
    return out + ")";
}

PointD point_double(const PointQ& x) {
    PointD out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = to_double(x[i]);
    return out;
}

QMat qmat_zero(int rows, int cols) {
    return QMat(rows, std::vector<Rat>(cols, Rat(0)));
}

QMat qmat_identity(int n) {
    QMat m = qmat_zero(n, n);
    for (int i = 0; i < n; ++i) m[i][i] = 1;
    return m;
}

QMat qmat_mul(const QMat& a, const QMat& b) {
    int rows = (int)a.size(), inner = (int)b.size(), cols = (int)b[0].size();
    QMat out = qmat_zero(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int k = 0; k < inner; ++k) {
            if (a[i][k] == 0) continue;
            for (int j = 0; j < cols; ++j)
                if (b[k][j] != 0) out[i][j] += a[i][k] * b[k][j];
        }
    return out;
}

PointQ qmat_apply(const QMat& a, const PointQ& x) {
    PointQ out(a.size(), Rat(0));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < x.size(); ++j)
            if (a[i][j] != 0 && x[j] != 0) out[i] += a[i][j] * x[j];
    return out;
}

QMat qmat_add(const QMat& a, const QMat& b) {
    QMat out = a;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a[i].size(); ++j) out[i][j] += b[i][j];
    return out;
}

QMat qmat_scale(const Rat& c, const QMat& a) {
    QMat out = a;
    for (auto& row : out)
        for (auto& v : row) v *= c;
    return out;
}

namespace {

// Returns {success, inverse-or-empty, det}.
std::pair<bool, QMat> gauss_jordan(QMat m) {
    int n = (int)m.size();
    QMat inv = qmat_identity(n);
    for (int col = 0; col < n; ++col) {
        int pivot = -1;
        for (int row = col; row < n; ++row)
            if (m[row][col] != 0) { pivot = row; break; }
        if (pivot < 0) return {false, {}};
        std::swap(m[pivot], m[col]);
        std::swap(inv[pivot], inv[col]);
        Rat p = m[col][col];
        for (int j = 0; j < n; ++j) { m[col][j] /= p; inv[col][j] /= p; }
        for (int row = 0; row < n; ++row) {
            if (row == col || m[row][col] == 0) continue;
            Rat f = m[row][col];
            for (int j = 0; j < n; ++j) {
                m[row][j] -= f * m[col][j];
                inv[row][j] -= f * inv[col][j];
            }
        }
    }
    return {true, inv};
}

} // namespace

QMat qmat_inverse(const QMat& a) {
    auto [ok, inv] = gauss_jordan(a);
    if (!ok) throw PreconditionError("matrix is singular");
    return inv;
}

bool qmat_is_invertible(const QMat& a) { return gauss_jordan(a).first; }

int qmat_rank(QMat rows) {
    if (rows.empty()) return 0;
    int nr = (int)rows.size(), nc = (int)rows[0].size();
    int rank = 0;
    for (int col = 0; col < nc && rank < nr; ++col) {
        int pivot = -1;
        for (int row = rank; row < nr; ++row)
            if (rows[row][col] != 0) { pivot = row; break; }
        if (pivot < 0) continue;
        std::swap(rows[rank], rows[pivot]);
        for (int row = 0; row < nr; ++row) {
            if (row == rank || rows[row][col] == 0) continue;
            Rat f = rows[row][col] / rows[rank][col];
            for (int c = col; c < nc; ++c) rows[row][c] -= f * rows[rank][c];
        }
        ++rank;
    }
    return rank;
}

Rat qmat_det(const QMat& a) {
    QMat m = a;
    int n = (int)m.size();
    Rat det(1);
    for (int col = 0; col < n; ++col) {
        int pivot = -1;
        for (int row = col; row < n; ++row)
            if (m[row][col] != 0) { pivot = row; break; }
        if (pivot < 0) return Rat(0);
        if (pivot != col) { std::swap(m[pivot], m[col]); det = -det; }
        det *= m[col][col];
        Rat p = m[col][col];
        for (int row = col + 1; row < n; ++row) {
            if (m[row][col] == 0) continue;
            Rat f = m[row][col] / p;
            for (int j = col; j < n; ++j) m[row][j] -= f * m[col][j];
        }
    }
    return det;
}

WeightSequence make_weight_sequence(const std::vector<int>& w) {
    if (w.empty()) throw InputError("weight sequence is empty");
    if (w.front() != 1) throw InputError("weight sequence must start at 1");
    for (std::size_t i = 0; i + 1 < w.size(); ++i)
        if (w[i + 1] < w[i]) throw InputError("weight sequence must be non-decreasing");
    for (std::size_t i = 0; i + 1 < w.size(); ++i)
        if (w[i + 1] > w[i] + 1)
            throw InputError("weight sequence has a gap between " +
                             std::to_string(w[i]) + " and " + std::to_string(w[i + 1]));
    WeightSequence ws;
    ws.n = (int)w.size();
    ws.r = w.back();
    ws.w = w;
    return ws;
}

int layer_rank(const WeightSequence& ws, int v) {
    int count = 0;
    for (int wi : ws.w)
        if (wi <= v) ++count;
    return count;
}

long long weighted_degree(const MultiIndex& alpha, const std::vector<int>& w) {
    if (alpha.size() != w.size())
        throw PreconditionError("multi-index length does not match variable count");
    long long deg = 0;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        if (alpha[i] < 0) throw PreconditionError("negative exponent in multi-index");
        deg += (long long)alpha[i] * w[i];
    }
    return deg;
}

PointQ dilate(const Rat& t, const PointQ& x, const WeightSequence& ws) {
    if ((int)x.size() != ws.n) throw PreconditionError("point dimension mismatch");
    PointQ out(x.size());
    for (int i = 0; i < ws.n; ++i) {
        Rat f(1);
        for (int k = 0; k < ws.w[i]; ++k) f *= t;
        out[i] = f * x[i];
    }
    return out;
}

PointD dilate(double t, const PointD& x, const WeightSequence& ws) {
    if ((int)x.size() != ws.n) throw PreconditionError("point dimension mismatch");
    PointD out(x.size());
    for (int i = 0; i < ws.n; ++i) out[i] = std::pow(t, ws.w[i]) * x[i];
    return out;
}

double pseudo_norm(const PointD& x, const WeightSequence& ws) {
    if ((int)x.size() != ws.n) throw PreconditionError("point dimension mismatch");
    double s = 0;
    for (int i = 0; i < ws.n; ++i) s += std::pow(std::abs(x[i]), 1.0 / ws.w[i]);
    return s;
}

double pseudo_norm(const PointQ& x, const WeightSequence& ws) {
    return pseudo_norm(point_double(x), ws);
}

} // namespace carnot
