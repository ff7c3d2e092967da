#include "eotsim/fdtd.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace eotsim::fdtd {

using materials::kSpeedOfLight;
using materials::kVacuumPermeability;
using materials::kVacuumPermittivity;

double DftPlane::flux(std::size_t lambda_index, double dx_nm, double dy_nm) const {
  const std::size_t n = cells();
  const auto* pex = ex.data() + lambda_index * n;
  const auto* pey = ey.data() + lambda_index * n;
  const auto* phx = hx.data() + lambda_index * n;
  const auto* phy = hy.data() + lambda_index * n;
  double sum = 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    sum += pex[c].real() * phy[c].real() + pex[c].imag() * phy[c].imag();
    sum -= pey[c].real() * phx[c].real() + pey[c].imag() * phx[c].imag();
  }
  return 0.5 * sum * (dx_nm * 1e-9) * (dy_nm * 1e-9);
}

double combined_flux(const DftPlane& a, const DftPlane& b, double c, double s,
                     std::size_t lambda_index, double dx_nm, double dy_nm) {
  if (a.nx != b.nx || a.ny != b.ny) {
    throw std::invalid_argument("plane shapes differ");
  }
  const std::size_t n = a.cells();
  const std::size_t off = lambda_index * n;
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::complex<double> ex = c * a.ex[off + i] + s * b.ex[off + i];
    const std::complex<double> ey = c * a.ey[off + i] + s * b.ey[off + i];
    const std::complex<double> hx = c * a.hx[off + i] + s * b.hx[off + i];
    const std::complex<double> hy = c * a.hy[off + i] + s * b.hy[off + i];
    sum += ex.real() * hy.real() + ex.imag() * hy.imag();
    sum -= ey.real() * hx.real() + ey.imag() * hx.imag();
  }
  return 0.5 * sum * (dx_nm * 1e-9) * (dy_nm * 1e-9);
}

namespace {

struct PoleCoef {
  int kind = 0;  // 0 drude, 1 lorentz
  double a = 0.0, b = 0.0, c = 0.0;
};

struct Waveform {
  double t0 = 0.0, tau = 1.0, w0 = 0.0;

  double operator()(double t) const {
    const double u = t - t0;
    return std::exp(-u * u / (2.0 * tau * tau)) * std::cos(w0 * u);
  }
};

Waveform make_waveform(const SourceSpec& source) {
  if (!(source.lambda_min_nm > 0.0 && source.lambda_max_nm > source.lambda_min_nm)) {
    throw std::invalid_argument("source band must satisfy 0 < lambda_min < lambda_max");
  }
  const double f_lo = kSpeedOfLight / (source.lambda_max_nm * 1e-9);
  const double f_hi = kSpeedOfLight / (source.lambda_min_nm * 1e-9);
  const double f0 = 0.5 * (f_lo + f_hi);
  const double df = 0.5 * (f_hi - f_lo);
  // Spectral amplitude at the band edges is 10% of the peak.
  const double tau = std::sqrt(std::log(10.0)) / (std::numbers::pi * df * std::numbers::sqrt2);
  Waveform w;
  w.tau = tau;
  w.t0 = 6.0 * tau;
  w.w0 = 2.0 * std::numbers::pi * f0;
  return w;
}

}  // namespace

struct Simulation::Impl {
  SimulationGrid grid;
  int nx = 0, ny = 0, nz = 0;
  std::size_t plane_n = 0;  // nx*ny
  double dx = 0, dy = 0, dz = 0;  // meters
  double dt = 0;
  double inv_dx = 0, inv_dy = 0, inv_dz = 0;
  bool periodic_z = false;

  std::vector<double> Ex, Ey, Ez, Hx, Hy, Hz;
  std::vector<std::uint8_t> id;  // per cell

  // Per-material tables.
  std::vector<double> ce;    // dt / (eps0 * eps_inf)
  std::vector<double> epsr;  // eps_inf
  std::vector<char> has_poles;
  std::vector<int> npoles;
  int nslots = 0;
  std::vector<PoleCoef> pole;  // [id * nslots + slot]

  // Auxiliary polarization state, z window [win_lo, win_hi).
  int win_lo = 0, win_hi = 0;
  // [slot][window cell]; drude keeps J here, lorentz keeps P and P_prev.
  std::vector<std::vector<double>> ax_, ay_, az_;
  std::vector<std::vector<double>> px_, py_, pz_;

  // CPML (z only).
  int npml = 0;
  std::vector<double> be_lo, cpe_lo, be_hi, cpe_hi;
  std::vector<double> bh_lo, cph_lo, bh_hi, cph_hi;
  std::vector<double> psi_ex_lo, psi_ex_hi, psi_ey_lo, psi_ey_hi;
  std::vector<double> psi_hx_lo, psi_hx_hi, psi_hy_lo, psi_hy_hi;

  bool has_source = false;
  int k_src = -1;
  double src_ax = 1.0, src_ay = 0.0;
  Waveform waveform;

  struct Monitor {
    DftPlane plane;
    std::vector<double> omega;  // rad/s per wavelength
  };
  std::vector<Monitor> monitors;

  double cm = 0;  // dt / mu0

  std::size_t idx(int i, int j, int k) const {
    return (static_cast<std::size_t>(k) * ny + j) * nx + i;
  }
  std::size_t widx(int i, int j, int k) const {
    return (static_cast<std::size_t>(k - win_lo) * ny + j) * nx + i;
  }

  void build(const VoxelGrid& voxels);
  void update_e(long n);
  void update_h();
  void accumulate(long n);
  double field_energy_sum() const;
};

void Simulation::Impl::build(const VoxelGrid& voxels) {
  nx = grid.nx;
  ny = grid.ny;
  nz = grid.nz;
  plane_n = static_cast<std::size_t>(nx) * ny;
  dx = grid.dx_nm * 1e-9;
  dy = grid.dy_nm * 1e-9;
  dz = grid.dz_nm * 1e-9;
  inv_dx = 1.0 / dx;
  inv_dy = 1.0 / dy;
  inv_dz = 1.0 / dz;
  dt = grid.dt_s();
  cm = dt / kVacuumPermeability;
  npml = grid.pml_cells;
  periodic_z = (npml == 0);

  const std::size_t n = plane_n * nz;
  Ex.assign(n, 0.0);
  Ey.assign(n, 0.0);
  Ez.assign(n, 0.0);
  Hx.assign(n, 0.0);
  Hy.assign(n, 0.0);
  Hz.assign(n, 0.0);
  id = voxels.material;

  const auto& table = voxels.table;
  ce.resize(table.size());
  epsr.resize(table.size());
  has_poles.resize(table.size());
  npoles.resize(table.size());
  nslots = 0;
  for (std::size_t m = 0; m < table.size(); ++m) {
    materials::validate_material(table[m]);
    epsr[m] = table[m].eps_inf;
    ce[m] = dt / (kVacuumPermittivity * table[m].eps_inf);
    npoles[m] = static_cast<int>(table[m].poles.size());
    has_poles[m] = npoles[m] > 0;
    nslots = std::max(nslots, npoles[m]);
  }
  pole.assign(table.size() * std::max(nslots, 1), {});
  for (std::size_t m = 0; m < table.size(); ++m) {
    for (int s = 0; s < npoles[m]; ++s) {
      const auto& p = table[m].poles[s];
      PoleCoef c;
      const double wp2 = p.strength * p.omega_rad_s * p.omega_rad_s;
      if (p.kind == materials::PoleKind::drude) {
        const double den = 1.0 + 0.5 * p.damping_rad_s * dt;
        c.kind = 0;
        c.a = (1.0 - 0.5 * p.damping_rad_s * dt) / den;
        c.b = kVacuumPermittivity * wp2 * dt / den;
      } else {
        const double den = 1.0 / (dt * dt) + 0.5 * p.damping_rad_s / dt;
        c.kind = 1;
        c.a = (2.0 / (dt * dt) - p.omega_rad_s * p.omega_rad_s) / den;
        c.b = -(1.0 / (dt * dt) - 0.5 * p.damping_rad_s / dt) / den;
        c.c = kVacuumPermittivity * wp2 / den;
      }
      pole[m * nslots + s] = c;
    }
  }

  // Dispersive window: smallest z slab containing every cell with poles.
  win_lo = nz;
  win_hi = 0;
  for (int k = 0; k < nz; ++k) {
    bool any = false;
    for (std::size_t c = k * plane_n; c < (k + 1) * plane_n; ++c) {
      any = any || has_poles[id[c]];
    }
    if (any) {
      win_lo = std::min(win_lo, k);
      win_hi = std::max(win_hi, k + 1);
    }
  }
  if (win_lo >= win_hi) {
    win_lo = win_hi = 0;
  }
  const std::size_t wn = plane_n * static_cast<std::size_t>(win_hi - win_lo);
  ax_.assign(nslots, {});
  ay_.assign(nslots, {});
  az_.assign(nslots, {});
  px_.assign(nslots, {});
  py_.assign(nslots, {});
  pz_.assign(nslots, {});
  for (int s = 0; s < nslots; ++s) {
    ax_[s].assign(wn, 0.0);
    ay_[s].assign(wn, 0.0);
    az_[s].assign(wn, 0.0);
    px_[s].assign(wn, 0.0);
    py_[s].assign(wn, 0.0);
    pz_[s].assign(wn, 0.0);
  }

  if (npml > 0) {
    const double eta0 = std::sqrt(kVacuumPermeability / kVacuumPermittivity);
    const double m_grade = 3.0;
    const double sigma_max = 0.8 * (m_grade + 1.0) / (eta0 * dz);
    auto coef = [&](double depth_frac, double& b, double& c) {
      const double sigma = sigma_max * std::pow(depth_frac, m_grade);
      b = std::exp(-sigma * dt / kVacuumPermittivity);
      c = b - 1.0;
    };
    be_lo.resize(npml);
    cpe_lo.resize(npml);
    be_hi.resize(npml);
    cpe_hi.resize(npml);
    bh_lo.resize(npml);
    cph_lo.resize(npml);
    bh_hi.resize(npml);
    cph_hi.resize(npml);
    for (int l = 0; l < npml; ++l) {
      coef((npml - l) / static_cast<double>(npml), be_lo[l], cpe_lo[l]);
      coef((l + 1.0) / npml, be_hi[l], cpe_hi[l]);
      coef((npml - l - 0.5) / npml, bh_lo[l], cph_lo[l]);
      coef((l + 0.5) / npml, bh_hi[l], cph_hi[l]);
    }
    const std::size_t pn = plane_n * npml;
    psi_ex_lo.assign(pn, 0.0);
    psi_ex_hi.assign(pn, 0.0);
    psi_ey_lo.assign(pn, 0.0);
    psi_ey_hi.assign(pn, 0.0);
    psi_hx_lo.assign(pn, 0.0);
    psi_hx_hi.assign(pn, 0.0);
    psi_hy_lo.assign(pn, 0.0);
    psi_hy_hi.assign(pn, 0.0);
  }
}

void Simulation::Impl::update_e(long n) {
  (void)n;
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int k = 0; k < nz; ++k) {
    const int km = (k > 0) ? k - 1 : (periodic_z ? nz - 1 : -1);
    const bool in_window = (k >= win_lo && k < win_hi);
    const bool pml_lo_zone = (npml > 0 && k < npml);
    const bool pml_hi_zone = (npml > 0 && k >= nz - npml);
    double be = 1.0, cpe = 0.0;
    double* psi_ex = nullptr;
    double* psi_ey = nullptr;
    if (pml_lo_zone) {
      be = be_lo[k];
      cpe = cpe_lo[k];
      psi_ex = psi_ex_lo.data() + static_cast<std::size_t>(k) * plane_n;
      psi_ey = psi_ey_lo.data() + static_cast<std::size_t>(k) * plane_n;
    } else if (pml_hi_zone) {
      const int l = k - (nz - npml);
      be = be_hi[l];
      cpe = cpe_hi[l];
      psi_ex = psi_ex_hi.data() + static_cast<std::size_t>(l) * plane_n;
      psi_ey = psi_ey_hi.data() + static_cast<std::size_t>(l) * plane_n;
    }
    for (int j = 0; j < ny; ++j) {
      const int jm = (j > 0) ? j - 1 : ny - 1;
      for (int i = 0; i < nx; ++i) {
        const int im = (i > 0) ? i - 1 : nx - 1;
        const std::size_t c = idx(i, j, k);
        const std::size_t c_jm = idx(i, jm, k);
        const std::size_t c_im = idx(im, j, k);
        const std::size_t c_km = (km >= 0) ? idx(i, j, km) : 0;
        const std::uint8_t m = id[c];
        const double cem = ce[m];

        // Ex: dHz/dy - dHy/dz
        double dhz_dy = (Hz[c] - Hz[c_jm]) * inv_dy;
        double dhy_dz = ((km >= 0 ? Hy[c] - Hy[c_km] : Hy[c])) * inv_dz;
        // Ey: dHx/dz - dHz/dx
        double dhx_dz = ((km >= 0 ? Hx[c] - Hx[c_km] : Hx[c])) * inv_dz;
        double dhz_dx = (Hz[c] - Hz[c_im]) * inv_dx;
        // Ez: dHy/dx - dHx/dy
        const double dhy_dx = (Hy[c] - Hy[c_im]) * inv_dx;
        const double dhx_dy = (Hx[c] - Hx[c_jm]) * inv_dy;

        if (psi_ex != nullptr) {
          const std::size_t pc = static_cast<std::size_t>(j) * nx + i;
          psi_ex[pc] = be * psi_ex[pc] + cpe * dhy_dz;
          dhy_dz += psi_ex[pc];
          psi_ey[pc] = be * psi_ey[pc] + cpe * dhx_dz;
          dhx_dz += psi_ey[pc];
        }

        double jx_sum = 0.0, jy_sum = 0.0, jz_sum = 0.0;
        if (in_window && has_poles[m]) {
          const std::size_t w = widx(i, j, k);
          const double ex0 = Ex[c], ey0 = Ey[c], ez0 = Ez[c];
          const int np = npoles[m];
          for (int s = 0; s < np; ++s) {
            const PoleCoef& pc = pole[m * nslots + s];
            if (pc.kind == 0) {
              ax_[s][w] = pc.a * ax_[s][w] + pc.b * ex0;
              ay_[s][w] = pc.a * ay_[s][w] + pc.b * ey0;
              az_[s][w] = pc.a * az_[s][w] + pc.b * ez0;
              jx_sum += ax_[s][w];
              jy_sum += ay_[s][w];
              jz_sum += az_[s][w];
            } else {
              const double pnx = pc.a * ax_[s][w] + pc.b * px_[s][w] + pc.c * ex0;
              const double pny = pc.a * ay_[s][w] + pc.b * py_[s][w] + pc.c * ey0;
              const double pnz = pc.a * az_[s][w] + pc.b * pz_[s][w] + pc.c * ez0;
              jx_sum += (pnx - ax_[s][w]) / dt;
              jy_sum += (pny - ay_[s][w]) / dt;
              jz_sum += (pnz - az_[s][w]) / dt;
              px_[s][w] = ax_[s][w];
              py_[s][w] = ay_[s][w];
              pz_[s][w] = az_[s][w];
              ax_[s][w] = pnx;
              ay_[s][w] = pny;
              az_[s][w] = pnz;
            }
          }
        }

        Ex[c] += cem * (dhz_dy - dhy_dz - jx_sum);
        Ey[c] += cem * (dhx_dz - dhz_dx - jy_sum);
        Ez[c] += cem * (dhy_dx - dhx_dy - jz_sum);
      }
    }
  }
}

void Simulation::Impl::update_h() {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int k = 0; k < nz; ++k) {
    const int kp = (k < nz - 1) ? k + 1 : (periodic_z ? 0 : -1);
    const bool pml_lo_zone = (npml > 0 && k < npml);
    const bool pml_hi_zone = (npml > 0 && k >= nz - npml);
    double bh = 1.0, cph = 0.0;
    double* psi_hx = nullptr;
    double* psi_hy = nullptr;
    if (pml_lo_zone) {
      bh = bh_lo[k];
      cph = cph_lo[k];
      psi_hx = psi_hx_lo.data() + static_cast<std::size_t>(k) * plane_n;
      psi_hy = psi_hy_lo.data() + static_cast<std::size_t>(k) * plane_n;
    } else if (pml_hi_zone) {
      const int l = k - (nz - npml);
      bh = bh_hi[l];
      cph = cph_hi[l];
      psi_hx = psi_hx_hi.data() + static_cast<std::size_t>(l) * plane_n;
      psi_hy = psi_hy_hi.data() + static_cast<std::size_t>(l) * plane_n;
    }
    for (int j = 0; j < ny; ++j) {
      const int jp = (j < ny - 1) ? j + 1 : 0;
      for (int i = 0; i < nx; ++i) {
        const int ip = (i < nx - 1) ? i + 1 : 0;
        const std::size_t c = idx(i, j, k);
        const std::size_t c_jp = idx(i, jp, k);
        const std::size_t c_ip = idx(ip, j, k);
        const std::size_t c_kp = (kp >= 0) ? idx(i, j, kp) : 0;

        const double dez_dy = (Ez[c_jp] - Ez[c]) * inv_dy;
        double dey_dz = ((kp >= 0 ? Ey[c_kp] : 0.0) - Ey[c]) * inv_dz;
        double dex_dz = ((kp >= 0 ? Ex[c_kp] : 0.0) - Ex[c]) * inv_dz;
        const double dez_dx = (Ez[c_ip] - Ez[c]) * inv_dx;
        const double dey_dx = (Ey[c_ip] - Ey[c]) * inv_dx;
        const double dex_dy = (Ex[c_jp] - Ex[c]) * inv_dy;

        if (psi_hx != nullptr) {
          const std::size_t pc = static_cast<std::size_t>(j) * nx + i;
          psi_hx[pc] = bh * psi_hx[pc] + cph * dey_dz;
          dey_dz += psi_hx[pc];
          psi_hy[pc] = bh * psi_hy[pc] + cph * dex_dz;
          dex_dz += psi_hy[pc];
        }

        Hx[c] -= cm * (dez_dy - dey_dz);
        Hy[c] -= cm * (dex_dz - dez_dx);
        Hz[c] -= cm * (dey_dx - dex_dy);
      }
    }
  }
}

void Simulation::Impl::accumulate(long n) {
  const double t_e = (n + 1) * dt;
  const double t_h = (n + 1.5) * dt;
  for (auto& mon : monitors) {
    auto& p = mon.plane;
    const int k = p.k;
    const int km = k - 1;  // monitor planes sit strictly inside the grid
    const std::size_t cells = p.cells();
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int l = 0; l < static_cast<int>(p.wavelengths_nm.size()); ++l) {
      const double w = mon.omega[l];
      const std::complex<double> phe = std::polar(dt, -w * t_e);
      const std::complex<double> phh = std::polar(dt, -w * t_h);
      const std::size_t off = static_cast<std::size_t>(l) * cells;
      for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
          const std::size_t c = idx(i, j, k);
          const std::size_t c_km = idx(i, j, km);
          const std::size_t pc = off + static_cast<std::size_t>(j) * nx + i;
          p.ex[pc] += phe * Ex[c];
          p.ey[pc] += phe * Ey[c];
          p.hx[pc] += phh * 0.5 * (Hx[c] + Hx[c_km]);
          p.hy[pc] += phh * 0.5 * (Hy[c] + Hy[c_km]);
          if (p.with_ez) {
            p.ez[pc] += phe * 0.5 * (Ez[c] + Ez[c_km]);
          }
        }
      }
    }
  }
}

double Simulation::Impl::field_energy_sum() const {
  const double dv = dx * dy * dz;
  double e_sum = 0.0;
  double h_sum = 0.0;
  for (std::size_t c = 0; c < Ex.size(); ++c) {
    const double er = epsr[id[c]];
    e_sum += er * (Ex[c] * Ex[c] + Ey[c] * Ey[c] + Ez[c] * Ez[c]);
    h_sum += Hx[c] * Hx[c] + Hy[c] * Hy[c] + Hz[c] * Hz[c];
  }
  return 0.5 * dv * (kVacuumPermittivity * e_sum + kVacuumPermeability * h_sum);
}

Simulation::Simulation(const SimulationGrid& grid, const VoxelGrid& voxels)
    : impl_(std::make_unique<Impl>()) {
  validate_grid(grid);
  if (voxels.nx != grid.nx || voxels.ny != grid.ny || voxels.nz != grid.nz) {
    throw std::invalid_argument("voxel grid does not match the simulation grid");
  }
  impl_->grid = grid;
  impl_->build(voxels);
}

Simulation::~Simulation() = default;

void Simulation::set_plane_source(int k_source, const SourceSpec& source) {
  if (k_source < 1 || k_source >= impl_->nz - 1) {
    throw std::invalid_argument("source plane outside the grid");
  }
  impl_->has_source = true;
  impl_->k_src = k_source;
  const double rad = source.polarization_deg * std::numbers::pi / 180.0;
  impl_->src_ax = std::cos(rad);
  impl_->src_ay = std::sin(rad);
  impl_->waveform = make_waveform(source);
}

int Simulation::add_flux_plane(int k, std::vector<double> wavelengths_nm) {
  if (k < 1 || k >= impl_->nz - 1) {
    throw std::invalid_argument("monitor plane outside the grid");
  }
  Impl::Monitor mon;
  mon.plane.k = k;
  mon.plane.nx = impl_->nx;
  mon.plane.ny = impl_->ny;
  mon.plane.wavelengths_nm = std::move(wavelengths_nm);
  const std::size_t n = mon.plane.cells() * mon.plane.wavelengths_nm.size();
  mon.plane.ex.assign(n, {});
  mon.plane.ey.assign(n, {});
  mon.plane.hx.assign(n, {});
  mon.plane.hy.assign(n, {});
  mon.omega.reserve(mon.plane.wavelengths_nm.size());
  for (const double wl : mon.plane.wavelengths_nm) {
    mon.omega.push_back(materials::wavelength_nm_to_rad_s(wl));
  }
  impl_->monitors.push_back(std::move(mon));
  return static_cast<int>(impl_->monitors.size()) - 1;
}

int Simulation::add_map_plane(int k, std::vector<double> wavelengths_nm) {
  const int handle = add_flux_plane(k, std::move(wavelengths_nm));
  auto& p = impl_->monitors[handle].plane;
  p.with_ez = true;
  p.ez.assign(p.cells() * p.wavelengths_nm.size(), {});
  return handle;
}

void Simulation::step() {
  impl_->update_e(step_count_);
  if (impl_->has_source) {
    const double g = impl_->waveform((step_count_ + 1) * impl_->dt);
    const double gx = impl_->src_ax * g;
    const double gy = impl_->src_ay * g;
    double* ex = impl_->Ex.data() + impl_->idx(0, 0, impl_->k_src);
    double* ey = impl_->Ey.data() + impl_->idx(0, 0, impl_->k_src);
    for (std::size_t c = 0; c < impl_->plane_n; ++c) {
      ex[c] += gx;
      ey[c] += gy;
    }
  }
  impl_->update_h();
  impl_->accumulate(step_count_);
  ++step_count_;
}

RunStatus Simulation::run(const RunPolicy& policy) {
#ifdef _OPENMP
  if (policy.workers > 0) {
    omp_set_num_threads(policy.workers);
  }
#endif
  // Let the pulse clear the source and cross the grid twice before the decay
  // test can fire.
  const double slowest = 2.2;  // bound on the largest refractive index in play
  const double t_min = impl_->waveform.t0 + 6.0 * impl_->waveform.tau +
                       2.0 * slowest * impl_->nz * impl_->dz / kSpeedOfLight;
  const double thr2 = policy.decay_threshold * policy.decay_threshold;

  RunStatus status;
  double peak = 0.0;
  double last = 0.0;
  while (step_count_ < policy.max_steps) {
    step();
    if (step_count_ % policy.check_every != 0) {
      continue;
    }
    double sum = 0.0;
    for (std::size_t c = 0; c < impl_->Ex.size(); ++c) {
      sum += impl_->Ex[c] * impl_->Ex[c] + impl_->Ey[c] * impl_->Ey[c] +
             impl_->Ez[c] * impl_->Ez[c];
    }
    if (!std::isfinite(sum)) {
      throw NumericalInstabilityError(
          "non-finite field energy at step " + std::to_string(step_count_) +
          "; time step violates the stability bound or a material is unstable");
    }
    peak = std::max(peak, sum);
    last = sum;
    if (time_s() >= t_min && peak > 0.0 && sum <= peak * thr2) {
      status.converged = true;
      break;
    }
  }
  status.steps = step_count_;
  status.residual_field_fraction = (peak > 0.0) ? std::sqrt(last / peak) : 0.0;
  if (step_count_ >= policy.max_steps && status.residual_field_fraction > policy.decay_threshold) {
    status.converged = false;
  }
  return status;
}

const DftPlane& Simulation::plane(int handle) const {
  return impl_->monitors.at(handle).plane;
}

double Simulation::time_s() const { return step_count_ * impl_->dt; }
double Simulation::dt_s() const { return impl_->dt; }
const SimulationGrid& Simulation::grid() const { return impl_->grid; }

double Simulation::total_field_energy() const { return impl_->field_energy_sum(); }

double& Simulation::field(char component, int i, int j, int k) {
  const std::size_t c = impl_->idx(i, j, k);
  switch (component) {
    case 'x': return impl_->Ex[c];
    case 'y': return impl_->Ey[c];
    case 'z': return impl_->Ez[c];
    case 'X': return impl_->Hx[c];
    case 'Y': return impl_->Hy[c];
    case 'Z': return impl_->Hz[c];
  }
  throw std::invalid_argument("unknown field component");
}

double Simulation::probe_ex(int i, int j, int k) const {
  return impl_->Ex[impl_->idx(i, j, k)];
}

namespace {

void check_wavelengths(const SourceSpec& source, const std::vector<double>& wavelengths) {
  if (wavelengths.empty()) {
    throw std::invalid_argument("monitor wavelength list is empty");
  }
  for (const double wl : wavelengths) {
    if (wl < source.lambda_min_nm - 1e-9 || wl > source.lambda_max_nm + 1e-9) {
      throw std::invalid_argument("monitor wavelength " + std::to_string(wl) +
                                  " nm outside the source band");
    }
  }
}

}  // namespace

TransmissionSpectrum run_transmission(const DeviceStack& stack, const GridSpec& spec,
                                      const SourceSpec& source,
                                      const std::vector<double>& wavelengths_nm,
                                      const RunPolicy& policy, StructureVariant variant,
                                      NormalizationKind normalization) {
  check_wavelengths(source, wavelengths_nm);
  const StackLayout layout = make_layout(stack, spec);

  Simulation vac(layout.grid, build_geometry(stack, layout, StructureVariant::vacuum));
  vac.set_plane_source(layout.k_source, source);
  const int vt = vac.add_flux_plane(layout.k_transmit, wavelengths_nm);
  const int vr = vac.add_flux_plane(layout.k_reflect, wavelengths_nm);
  TransmissionSpectrum out;
  out.normalization_status = vac.run(policy);

  const DftPlane* ref_plane = &vac.plane(vt);
  std::unique_ptr<Simulation> sub;
  if (normalization == NormalizationKind::substrate) {
    sub = std::make_unique<Simulation>(layout.grid,
                                       build_geometry(stack, layout, StructureVariant::substrate_only));
    sub->set_plane_source(layout.k_source, source);
    sub->add_flux_plane(layout.k_transmit, wavelengths_nm);
    const RunStatus sub_status = sub->run(policy);
    out.normalization_status.converged =
        out.normalization_status.converged && sub_status.converged;
    ref_plane = &sub->plane(0);
    out.normalization = "substrate";
  }

  Simulation sim(layout.grid, build_geometry(stack, layout, variant));
  sim.set_plane_source(layout.k_source, source);
  const int st = sim.add_flux_plane(layout.k_transmit, wavelengths_nm);
  const int sr = sim.add_flux_plane(layout.k_reflect, wavelengths_nm);
  out.structure_status = sim.run(policy);

  const auto& tp = sim.plane(st);
  const auto& rp = sim.plane(sr);
  const auto& vac_t = vac.plane(vt);
  const auto& vac_r = vac.plane(vr);

  out.wavelengths_nm = wavelengths_nm;
  out.transmission.resize(wavelengths_nm.size());
  out.reflection.resize(wavelengths_nm.size());
  out.overshoot.assign(wavelengths_nm.size(), false);

  DftPlane refl = rp;  // reflected-only fields: structure minus incident
  for (std::size_t c = 0; c < refl.ex.size(); ++c) {
    refl.ex[c] -= vac_r.ex[c];
    refl.ey[c] -= vac_r.ey[c];
    refl.hx[c] -= vac_r.hx[c];
    refl.hy[c] -= vac_r.hy[c];
  }

  for (std::size_t l = 0; l < wavelengths_nm.size(); ++l) {
    const double f_ref = ref_plane->flux(l, spec.dx_nm, spec.dy_nm);
    const double f_inc = vac_t.flux(l, spec.dx_nm, spec.dy_nm);
    const double t = tp.flux(l, spec.dx_nm, spec.dy_nm) / f_ref;
    const double r = refl.flux(l, spec.dx_nm, spec.dy_nm) / f_inc;  // both signed, ratio > 0
    out.transmission[l] = t;
    out.reflection[l] = -r;  // incident flux is -z directed, reflected +z
    if (t > 1.05) {
      throw NumericalInstabilityError("transmission above 1.05 at " +
                                      std::to_string(wavelengths_nm[l]) + " nm");
    }
    out.overshoot[l] = t > 1.0;
  }
  return out;
}

FieldMap run_field_map(const DeviceStack& stack, const GridSpec& spec, const SourceSpec& source,
                       double wavelength_nm, const RunPolicy& policy, double z_offset_nm) {
  check_wavelengths(source, {wavelength_nm});
  const StackLayout layout = make_layout(stack, spec, z_offset_nm);
  const std::vector<double> wls{wavelength_nm};

  Simulation vac(layout.grid, build_geometry(stack, layout, StructureVariant::vacuum));
  vac.set_plane_source(layout.k_source, source);
  const int vm = vac.add_map_plane(layout.k_map, wls);
  vac.run(policy);

  Simulation sim(layout.grid, build_geometry(stack, layout, StructureVariant::full));
  sim.set_plane_source(layout.k_source, source);
  const int sm = sim.add_map_plane(layout.k_map, wls);
  FieldMap map;
  map.structure_status = sim.run(policy);

  const auto& vp = vac.plane(vm);
  const auto& pp = sim.plane(sm);
  const int nx = pp.nx, ny = pp.ny;
  map.nx = nx;
  map.ny = ny;
  map.dx_nm = spec.dx_nm;
  map.dy_nm = spec.dy_nm;
  map.wavelength_nm = wavelength_nm;
  map.z_offset_nm = z_offset_nm;
  map.ex.resize(pp.cells());
  map.ey.resize(pp.cells());
  map.ez.resize(pp.cells());
  map.magnitude.resize(pp.cells());

  auto center = [&](const DftPlane& p, int i, int j) {
    const int ip = (i < nx - 1) ? i + 1 : 0;
    const int jp = (j < ny - 1) ? j + 1 : 0;
    auto at = [&](const std::vector<std::complex<double>>& f, int ii, int jj) {
      return f[static_cast<std::size_t>(jj) * nx + ii];
    };
    std::complex<double> cx = 0.5 * (at(p.ex, i, j) + at(p.ex, i, jp));
    std::complex<double> cy = 0.5 * (at(p.ey, i, j) + at(p.ey, ip, j));
    std::complex<double> cz = 0.25 * (at(p.ez, i, j) + at(p.ez, ip, j) +
                                      at(p.ez, i, jp) + at(p.ez, ip, jp));
    return std::array<std::complex<double>, 3>{cx, cy, cz};
  };

  double ref_amp = 0.0;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const auto e = center(vp, i, j);
      ref_amp += std::sqrt(std::norm(e[0]) + std::norm(e[1]) + std::norm(e[2]));
    }
  }
  ref_amp /= pp.cells();
  if (!(ref_amp > 0.0)) {
    throw NumericalInstabilityError("empty-grid reference field vanished at the map plane");
  }

  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const auto e = center(pp, i, j);
      const std::size_t c = static_cast<std::size_t>(j) * nx + i;
      map.ex[c] = e[0] / ref_amp;
      map.ey[c] = e[1] / ref_amp;
      map.ez[c] = e[2] / ref_amp;
      map.magnitude[c] = std::sqrt(std::norm(map.ex[c]) + std::norm(map.ey[c]) +
                                   std::norm(map.ez[c]));
    }
  }
  return map;
}

FieldMap crop_field_map(const FieldMap& map, double window_nm) {
  const int wx = std::min(map.nx, static_cast<int>(std::llround(window_nm / map.dx_nm)));
  const int wy = std::min(map.ny, static_cast<int>(std::llround(window_nm / map.dy_nm)));
  if (wx < 1 || wy < 1) {
    throw std::invalid_argument("crop window smaller than one cell");
  }
  FieldMap out = map;
  out.nx = wx;
  out.ny = wy;
  out.ex.resize(static_cast<std::size_t>(wx) * wy);
  out.ey.resize(out.ex.size());
  out.ez.resize(out.ex.size());
  out.magnitude.resize(out.ex.size());
  const int x0 = (map.nx - wx) / 2;
  const int y0 = (map.ny - wy) / 2;
  for (int j = 0; j < wy; ++j) {
    for (int i = 0; i < wx; ++i) {
      const std::size_t src = static_cast<std::size_t>(j + y0) * map.nx + (i + x0);
      const std::size_t dst = static_cast<std::size_t>(j) * wx + i;
      out.ex[dst] = map.ex[src];
      out.ey[dst] = map.ey[src];
      out.ez[dst] = map.ez[src];
      out.magnitude[dst] = map.magnitude[src];
    }
  }
  return out;
}

}  // namespace eotsim::fdtd
