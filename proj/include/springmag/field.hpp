#pragma once

#include <algorithm>
#include <cstddef>
#include <utility>
#include <vector>

#include "springmag/errors.hpp"
#include "springmag/model.hpp"
#include "springmag/vec3.hpp"

namespace springmag {

struct FieldSet {
  std::vector<Vec3> H;        // effective field per layer, Oe
  double max_magnitude = 0.0; // max_i |H_i|, Oe

  std::size_t size() const noexcept { return H.size(); }
};

namespace detail {
inline void check_sizes(const MaterialStack &stack, const ChainState &state) {
  if (state.size() != stack.size())
    throw ValidationError("state", "spin count must equal the layer count");
}
} // namespace detail

/// Effective field in every layer: applied + exchange + anisotropy +
/// demagnetization, all in oersted. The chain ends are free (m_0 = m_1,
/// m_{N+1} = m_N), so the missing neighbour contributes nothing.
inline void effective_field(const MaterialStack &stack, const ChainState &state,
                            const AppliedField &applied, FieldSet &out) {
  detail::check_sizes(stack, state);
  const std::size_t n = state.size();
  const Vec3 Ha = applied.vector();
  out.H.resize(n);
  double max2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 &m = state.spins[i].vec();
    const double inv_M = 1.0 / stack.M[i];
    Vec3 exch{};
    if (i + 1 < n)
      exch += stack.J[i] * (state.spins[i + 1].vec() - m);
    if (i > 0)
      exch -= stack.J[i - 1] * (m - state.spins[i - 1].vec());
    // e_x x (m x e_x) = (0, m_y, m_z)
    const double aniso = 2.0 * stack.K[i] * inv_M;
    const double demag = stack.demag_coeff * stack.M[i];
    Vec3 h = Ha + inv_M * exch;
    h.y -= aniso * m.y;
    h.z -= (aniso + demag) * m.z;
    out.H[i] = h;
    max2 = std::max(max2, norm2(h));
  }
  out.max_magnitude = std::sqrt(max2);
}

inline FieldSet effective_field(const MaterialStack &stack,
                                const ChainState &state,
                                const AppliedField &applied) {
  FieldSet f;
  effective_field(stack, state, applied, f);
  return f;
}

struct FieldComponents {
  std::vector<Vec3> in_plane;        // (H_x, H_y, 0)
  std::vector<double> out_of_plane;  // H_z
};

inline FieldComponents field_split(const FieldSet &fields) {
  FieldComponents c;
  c.in_plane.reserve(fields.size());
  c.out_of_plane.reserve(fields.size());
  for (const Vec3 &h : fields.H) {
    c.in_plane.push_back({h.x, h.y, 0.0});
    c.out_of_plane.push_back(h.z);
  }
  return c;
}

/// Energy per unit film area (erg/cm^2): exchange, anisotropy,
/// demagnetization and Zeeman terms, each layer weighted by its thickness d.
/// Its negative gradient with respect to M_i, projected onto the sphere, is
/// the effective field.
inline double total_energy(const MaterialStack &stack, const ChainState &state,
                           const AppliedField &applied) {
  detail::check_sizes(stack, state);
  const std::size_t n = state.size();
  const Vec3 Ha = applied.vector();
  double e = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 &m = state.spins[i].vec();
    if (i + 1 < n)
      e += stack.J[i] * (1.0 - dot(m, state.spins[i + 1].vec()));
    e += stack.K[i] * (m.y * m.y + m.z * m.z);
    e += 0.5 * stack.demag_coeff * stack.M[i] * stack.M[i] * m.z * m.z;
    e -= stack.M[i] * dot(m, Ha);
  }
  return stack.d * e;
}

} // namespace springmag
