#include "density_oracle.hpp"

#include <Eigen/Dense>

#include <stdexcept>

namespace qfa::oracle {

namespace {

using Mat4 = Eigen::Matrix4d;
using Mat16 = Eigen::Matrix<double, 16, 16>;

Eigen::Vector4d phi_plus()
{
  Eigen::Vector4d v = Eigen::Vector4d::Zero();
  v(0) = v(3) = 1.0 / std::sqrt(2.0); // |00> + |11>
  return v;
}

Mat4 werner(double f)
{
  const Eigen::Vector4d phi = phi_plus();
  const Mat4 proj = phi * phi.transpose();
  return f * proj + (1.0 - f) / 3.0 * (Mat4::Identity() - proj);
}

Mat16 kron(const Mat4& a, const Mat4& b)
{
  Mat16 out;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) out.block<4, 4>(4 * i, 4 * j) = a(i, j) * b;
  }
  return out;
}

int bit(int index, int pos) { return (index >> pos) & 1; }

double phi_fidelity(const Mat4& rho)
{
  const Eigen::Vector4d phi = phi_plus();
  return phi.dot(rho * phi);
}

// Qubit order (A, B1, B2, C); B1 B2 projected onto Phi+.
Mat4 swap_pair(const Mat4& left, const Mat4& right)
{
  const Mat16 rho = kron(left, right);
  Mat4 out = Mat4::Zero();
  for (int a = 0; a < 2; ++a)
    for (int c = 0; c < 2; ++c)
      for (int a2 = 0; a2 < 2; ++a2)
        for (int c2 = 0; c2 < 2; ++c2) {
          double sum = 0.0;
          for (int b = 0; b < 2; ++b)
            for (int b2 = 0; b2 < 2; ++b2) {
              const int row = (a << 3) | (b << 2) | (b << 1) | c;
              const int col = (a2 << 3) | (b2 << 2) | (b2 << 1) | c2;
              sum += 0.5 * rho(row, col);
            }
          out((a << 1) | c, (a2 << 1) | c2) = sum;
        }
  return out / out.trace();
}

} // namespace

double swap_chain_fidelity(std::span<const double> fidelities)
{
  if (fidelities.empty()) throw std::invalid_argument("empty chain");
  Mat4 state = werner(fidelities[0]);
  for (std::size_t i = 1; i < fidelities.size(); ++i) state = swap_pair(state, werner(fidelities[i]));
  return phi_fidelity(state);
}

PurifyResult bbpssw(double f1, double f2)
{
  // Order (A1, B1, A2, B2), bit 3 = A1 ... bit 0 = B2.
  const Mat16 rho = kron(werner(f1), werner(f2));
  Mat16 u = Mat16::Zero();
  for (int in = 0; in < 16; ++in) {
    int out = in;
    if (bit(in, 3)) out ^= 1 << 1; // CNOT A1 -> A2
    if (bit(in, 2)) out ^= 1 << 0; // CNOT B1 -> B2
    u(out, in) = 1.0;
  }
  const Mat16 after = u * rho * u.transpose();
  Mat4 kept = Mat4::Zero();
  for (int m = 0; m < 2; ++m) {
    const int target = (m << 1) | m;
    for (int s = 0; s < 4; ++s)
      for (int s2 = 0; s2 < 4; ++s2) kept(s, s2) += after((s << 2) | target, (s2 << 2) | target);
  }
  const double p = kept.trace();
  return {p, phi_fidelity(kept / p)};
}

} // namespace qfa::oracle
