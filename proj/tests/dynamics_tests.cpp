#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "cts/dynamics.hpp"
#include "cts/errors.hpp"
#include "cts/modal.hpp"
#include "cts/statics.hpp"
#include "cts/structure.hpp"
#include "helpers.hpp"

using namespace cts;
using test::prism;
using test::random_chain_structure;
using test::two_node;
using test::y_structure;

namespace {

Structure tensioned_prism(double anchor_force = -50.0) {
  Structure s = prism();
  const SelfStressModes modes =
      prestress_modes(equilibrium_matrices(s).density_form);
  s.rest_lengths_c =
      solve_prestress(s, modes, {0, anchor_force}).rest_lengths_c;
  return s;
}

Structure tensioned_y(double anchor_force = 50.0) {
  Structure s = y_structure();
  const SelfStressModes modes =
      prestress_modes(equilibrium_matrices(s).density_form);
  s.rest_lengths_c =
      solve_prestress(s, modes, {0, anchor_force}).rest_lengths_c;
  return s;
}

// modal coordinate of shape k about the reference coordinates
Eigen::VectorXd modal_trace(const DeployRecord& rec, const Structure& ref,
                            const Eigen::VectorXd& shape,
                            const Eigen::MatrixXd& m_free) {
  const std::vector<int> free = free_coord_indices(ref.nodes);
  const Eigen::VectorXd u_eq = gather(ref.nodes.coords, free);
  Eigen::VectorXd q(rec.steps());
  for (int i = 0; i < rec.steps(); ++i) {
    const Eigen::VectorXd u = gather(rec.coords.col(i), free);
    q(i) = shape.dot(m_free * (u - u_eq));
  }
  return q;
}

}  // namespace

TEST_CASE("consistent mass blocks of a single element") {
  // rho*A*l0 = 1000 * 1e-4 * 60 = 6 kg
  const Structure s = two_node(ElementKind::Bar, 60.0, 60.0);
  const MassMatrices m = assemble_mass(s);
  REQUIRE(m.full.rows() == 6);
  for (int k = 0; k < 3; ++k) {
    CHECK(m.full(k, k) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(m.full(3 + k, 3 + k) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(m.full(k, 3 + k) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m.full(3 + k, k) == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(m.full(0, 1) == 0.0);  // axes do not couple
  // per-axis row sums recover the element mass
  CHECK(m.full.row(0).sum() + m.full.row(3).sum() ==
        doctest::Approx(6.0).epsilon(1e-12));
  // total: one element mass per axis
  CHECK(m.full.sum() == doctest::Approx(18.0).epsilon(1e-12));
  // free block keeps only the free node
  REQUIRE(m.free.rows() == 3);
  CHECK(m.free(0, 0) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("mass matrix is symmetric positive definite over the free set") {
  const Structure s = tensioned_prism();
  const MassMatrices m = assemble_mass(s);
  CHECK((m.full - m.full.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(min_eigenvalue(m.free) > 0.0);
}

TEST_CASE("clustering does not change the mass matrix at matched states") {
  Structure s = random_chain_structure(6);
  s.rest_lengths_c(1) = 0.95 * evaluate_elements(s).lengths_c(1);  // taut cable
  const ElementState st = evaluate_elements(s);

  Structure flat = s;
  flat.cluster = ClusterMap::identity(s.n_elements());
  const std::vector<int> owner = s.cluster.owner();
  flat.rest_lengths_c.resize(s.n_elements());
  flat.mat.area.resize(s.n_elements());
  flat.mat.modulus.resize(s.n_elements());
  flat.mat.tangent_modulus.resize(s.n_elements());
  flat.mat.density.resize(s.n_elements());
  flat.mat.capacity.resize(s.n_elements());
  flat.mat.kind.resize(s.n_elements());
  for (int e = 0; e < s.n_elements(); ++e) {
    const int g = owner[e];
    flat.rest_lengths_c(e) =
        s.rest_lengths_c(g) * st.lengths(e) / st.lengths_c(g);
    flat.mat.area(e) = s.mat.area(g);
    flat.mat.modulus(e) = s.mat.modulus(g);
    flat.mat.tangent_modulus(e) = s.mat.tangent_modulus(g);
    flat.mat.density(e) = s.mat.density(g);
    flat.mat.capacity(e) = s.mat.capacity(g);
    flat.mat.kind[e] = s.mat.kind[g];
  }

  const MassMatrices clustered = assemble_mass(s);
  const MassMatrices flattened = assemble_mass(flat);
  CHECK(clustered.full.isApprox(flattened.full, 1e-12));
}

TEST_CASE("mass scale multiplies the assembled matrix") {
  Structure s = tensioned_prism();
  const Eigen::MatrixXd base = assemble_mass(s).full;
  s.mat.mass_scale = 50.0;
  CHECK(assemble_mass(s).full.isApprox(50.0 * base, 1e-12));
  // kinetic energy scales the same way
  Eigen::VectorXd v = Eigen::VectorXd::Zero(18);
  v(9) = 1.0;
  s.mat.mass_scale = 1.0;
  const double ke = kinetic_energy(s, v);
  s.mat.mass_scale = 50.0;
  CHECK(kinetic_energy(s, v) == doctest::Approx(50.0 * ke).epsilon(1e-12));
}

TEST_CASE("gravity loads put half the element weight on each end, z only") {
  // rho*A*l0 = 1000 * 1e-4 * 100 = 10 kg
  const Structure s = two_node(ElementKind::Bar, 100.0, 100.0);
  const Eigen::VectorXd g = assemble_gravity(s);
  REQUIRE(g.size() == 6);
  CHECK(g(2) == doctest::Approx(49.03325).epsilon(1e-9));
  CHECK(g(5) == doctest::Approx(49.03325).epsilon(1e-9));
  CHECK(g(0) == 0.0);
  CHECK(g(1) == 0.0);
  CHECK(g(3) == 0.0);
}

TEST_CASE("zero damping ratio yields exactly zero matrices") {
  const DampingMatrices d = assemble_damping(tensioned_prism(), 0.0);
  CHECK(d.a0 == 0.0);
  CHECK(d.a1 == 0.0);
  CHECK(d.full.cwiseAbs().maxCoeff() == 0.0);
  CHECK(d.free.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("damping calibration spans the positive spectrum") {
  const Structure s = tensioned_prism();
  const double zeta = 0.05;
  const DampingMatrices d = assemble_damping(s, zeta);

  const ModalResult modes = natural_frequencies(s, 9);
  double omega_lo = 0.0, omega_hi = 0.0;
  for (int i = 0; i < modes.omega_sq.size(); ++i) {
    if (modes.omega_sq(i) <= 0.0) continue;
    const double w = std::sqrt(modes.omega_sq(i));
    if (omega_lo == 0.0) omega_lo = w;
    omega_hi = w;
  }
  REQUIRE(omega_lo > 0.0);
  CHECK(d.a0 == 0.0);
  CHECK(d.a1 ==
        doctest::Approx(2.0 * zeta / std::sqrt(omega_lo * omega_hi)).epsilon(1e-9));
  // the matrix is the scaled tangent
  const Eigen::MatrixXd k_t = tangent_stiffness(s).K_T;
  CHECK(d.full.isApprox(d.a1 * k_t, 1e-12));
}

TEST_CASE("single positive frequency falls back to the two-term fit") {
  // string at natural length: lateral directions are mechanisms, only the
  // axial mode is stiff
  const Structure s = two_node(ElementKind::String, 2.0, 2.0);
  const double zeta = 0.1;
  const DampingMatrices d = assemble_damping(s, zeta);

  const ModalResult modes = natural_frequencies(s, 3);
  const double omega = std::sqrt(modes.omega_sq(2));
  CHECK(d.a0 == doctest::Approx(zeta * omega).epsilon(1e-9));
  CHECK(d.a1 == doctest::Approx(zeta / omega).epsilon(1e-9));
}

TEST_CASE("damping calibration needs at least one stiff direction") {
  const Structure slack = two_node(ElementKind::String, 0.9, 1.0);
  CHECK_THROWS_AS(assemble_damping(slack, 0.02), InsufficientModes);
}

TEST_CASE("integration rejects malformed configurations") {
  const Structure s = tensioned_prism();
  DynamicsConfig cfg;
  cfg.t_end = 0.01;

  SUBCASE("bad dt") {
    cfg.dt = 0.0;
    CHECK_THROWS_AS(integrate(s, cfg), InvalidInput);
  }
  SUBCASE("t_end shorter than one step") {
    cfg.t_end = 1e-4;
    CHECK_THROWS_AS(integrate(s, cfg), InvalidInput);
  }
  SUBCASE("damping ratio out of range") {
    cfg.damping_ratio = 1.0;
    CHECK_THROWS_AS(integrate(s, cfg), InvalidInput);
  }
  SUBCASE("nonpositive tolerance") {
    cfg.newton_tol = 0.0;
    CHECK_THROWS_AS(integrate(s, cfg), InvalidInput);
  }
  SUBCASE("no iterations allowed") {
    cfg.newton_max_iter = 0;
    CHECK_THROWS_AS(integrate(s, cfg), InvalidInput);
  }
  SUBCASE("nonpositive mass scale") {
    cfg.mass_scale = 0.0;
    CHECK_THROWS_AS(integrate(s, cfg), InvalidInput);
  }
  SUBCASE("external load size mismatch") {
    IntegrateOptions opt;
    opt.external_load = Eigen::VectorXd::Zero(5);
    CHECK_THROWS_AS(integrate(s, cfg, opt), InvalidInput);
  }
  SUBCASE("initial velocity size mismatch") {
    IntegrateOptions opt;
    opt.initial_velocity = Eigen::VectorXd::Zero(5);
    CHECK_THROWS_AS(integrate(s, cfg, opt), InvalidInput);
  }
  SUBCASE("starting away from equilibrium") {
    Structure off = s;
    off.rest_lengths_c(0) *= 0.9;  // unbalanced bar force
    CHECK_THROWS_WITH_AS(integrate(off, cfg),
                         doctest::Contains("equilibrium"), InvalidInput);
  }
}

TEST_CASE("an equilibrium state is a fixed point of the integrator") {
  const Structure s = tensioned_prism();
  DynamicsConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_end = 1.0;
  cfg.damping_ratio = 0.01;
  cfg.newton_tol = 1e-6;

  const DeployRecord rec = integrate(s, cfg);
  REQUIRE(rec.steps() == 1001);
  CHECK(rec.times(1000) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rec.times(1) == doctest::Approx(1e-3).epsilon(1e-12));

  double drift = 0.0, vmax = 0.0;
  for (int i = 0; i < rec.steps(); ++i) {
    drift = std::max(drift,
                     (rec.coords.col(i) - rec.coords.col(0)).cwiseAbs().maxCoeff());
    vmax = std::max(vmax, rec.velocities.col(i).cwiseAbs().maxCoeff());
  }
  CHECK(drift < 1e-9);
  CHECK(vmax < 1e-9);
  // forces and rest lengths stay at their prestress values
  CHECK((rec.force_c.col(1000) - rec.force_c.col(0)).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((rec.rest_lengths_c.col(500) - s.rest_lengths_c).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("undamped free vibration conserves the excess energy") {
  const Structure s = tensioned_prism();
  DynamicsConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_end = 2.0;
  cfg.damping_ratio = 0.0;
  cfg.newton_tol = 1e-9;

  // kick a mid-spectrum mode; shapes are mass-orthonormal so the initial
  // kinetic energy is eps^2 / 2 exactly
  const ModalResult modes = natural_frequencies(s, 9);
  const Eigen::VectorXd shape = modes.shapes.col(4);
  const std::vector<int> free = free_coord_indices(s.nodes);
  const double eps = 0.004;  // small enough to keep every string taut
  IntegrateOptions opt;
  opt.initial_velocity = Eigen::VectorXd::Zero(18);
  for (size_t i = 0; i < free.size(); ++i)
    opt.initial_velocity(free[i]) = eps * shape(static_cast<int>(i));

  const DeployRecord rec = integrate(s, cfg, opt);
  const double e_rest = elastic_energy(s);

  Structure probe = s;
  double e_min = 1e300, e_max = -1e300, string_min = 1e300;
  for (int i = 0; i < rec.steps(); ++i) {
    probe.nodes.coords = rec.coords.col(i);
    const double excess = elastic_energy(probe) - e_rest +
                          kinetic_energy(probe, rec.velocities.col(i));
    e_min = std::min(e_min, excess);
    e_max = std::max(e_max, excess);
    string_min = std::min(string_min, rec.force_c.col(i).tail(6).minCoeff());
  }
  const double e0 = 0.5 * eps * eps;
  CHECK(e_max - e_min < 0.005 * e0);
  CHECK(e_min > 0.5 * e0);     // the kick energy never evaporates
  CHECK(string_min > 0.0);     // linear regime: nothing slackened
}

TEST_CASE("ring-down decay matches the calibrated modal damping") {
  const Structure s = tensioned_prism();
  const double zeta = 0.2;
  const DampingMatrices damping = assemble_damping(s, zeta);
  const ModalResult modes = natural_frequencies(s, 9);
  const Eigen::MatrixXd m_free = assemble_mass(s).free;

  const int k = 0;  // fundamental
  const double omega = std::sqrt(modes.omega_sq(k));
  const double zeta_k = 0.5 * (damping.a0 / omega + damping.a1 * omega);

  DynamicsConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_end = 4.0;
  cfg.damping_ratio = zeta;
  cfg.newton_tol = 1e-9;

  const std::vector<int> free = free_coord_indices(s.nodes);
  IntegrateOptions opt;
  opt.initial_velocity = Eigen::VectorXd::Zero(18);
  for (size_t i = 0; i < free.size(); ++i)
    opt.initial_velocity(free[i]) = 0.002 * modes.shapes(static_cast<int>(i), k);

  const DeployRecord rec = integrate(s, cfg, opt);
  const Eigen::VectorXd q = modal_trace(rec, s, modes.shapes.col(k), m_free);

  // positive peaks of the modal coordinate
  std::vector<double> peaks;
  for (int i = 1; i + 1 < q.size(); ++i)
    if (q(i) > q(i - 1) && q(i) >= q(i + 1) && q(i) > 0.0)
      peaks.push_back(q(i));
  REQUIRE(peaks.size() >= 4);

  const double periods = static_cast<double>(peaks.size() - 1);
  const double delta = std::log(peaks.front() / peaks.back()) / periods;
  const double expected =
      2.0 * M_PI * zeta_k / std::sqrt(1.0 - zeta_k * zeta_k);
  CHECK(delta == doctest::Approx(expected).epsilon(0.2));
}

TEST_CASE("undamped oscillation frequency matches the modal prediction") {
  const Structure s = tensioned_prism();
  const ModalResult modes = natural_frequencies(s, 9);
  const Eigen::MatrixXd m_free = assemble_mass(s).free;
  const int k = 0;
  const double f_expected = modes.frequencies_hz(k);

  DynamicsConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_end = 4.0;
  cfg.damping_ratio = 0.0;
  cfg.newton_tol = 1e-9;

  const std::vector<int> free = free_coord_indices(s.nodes);
  IntegrateOptions opt;
  opt.initial_velocity = Eigen::VectorXd::Zero(18);
  for (size_t i = 0; i < free.size(); ++i)
    opt.initial_velocity(free[i]) = 0.002 * modes.shapes(static_cast<int>(i), k);

  const DeployRecord rec = integrate(s, cfg, opt);
  const Eigen::VectorXd q = modal_trace(rec, s, modes.shapes.col(k), m_free);

  // interpolated zero-crossing times; n crossings span (n-1) half-periods
  std::vector<double> crossings;
  for (int i = 0; i + 1 < q.size(); ++i) {
    if ((q(i) > 0.0) != (q(i + 1) > 0.0)) {
      const double frac = q(i) / (q(i) - q(i + 1));
      crossings.push_back(rec.times(i) + frac * cfg.dt);
    }
  }
  REQUIRE(crossings.size() >= 5);
  const double f_measured = 0.5 * (crossings.size() - 1) /
                            (crossings.back() - crossings.front());
  CHECK(f_measured == doctest::Approx(f_expected).epsilon(0.02));
}

TEST_CASE("strings pass through slack and return without force jumps") {
  const Structure s = tensioned_y();
  DynamicsConfig cfg;
  cfg.dt = 1e-4;
  cfg.t_end = 0.5;
  cfg.damping_ratio = 0.0;
  cfg.newton_tol = 1e-7;

  IntegrateOptions opt;
  opt.initial_velocity = Eigen::VectorXd::Zero(12);
  opt.initial_velocity(1) = 3.0;  // drive the hub toward two of the anchors

  const DeployRecord rec = integrate(s, cfg, opt);

  double f_low = 1e300, vmax = 0.0, df_max = 0.0;
  for (int i = 0; i < rec.steps(); ++i) {
    f_low = std::min(f_low, rec.force_c.col(i).minCoeff());
    vmax = std::max(vmax, rec.velocities.col(i).cwiseAbs().maxCoeff());
    if (i > 0)
      df_max = std::max(
          df_max, (rec.force_c.col(i) - rec.force_c.col(i - 1)).cwiseAbs().maxCoeff());
  }
  // the kick is strong enough to slacken the legs ahead of the hub...
  CHECK(f_low == 0.0);
  // ...no force ever goes negative...
  for (int i = 0; i < rec.steps(); ++i) CHECK(rec.force_c.col(i).minCoeff() >= 0.0);
  // ...and the force histories stay continuous at the slack transitions:
  // one step can change a force by at most E*A * vmax * dt / l0 (with slack
  // clamping only ever reducing that bound)
  const double ea = s.mat.modulus(0) * s.mat.area(0);
  const double bound = 3.0 * ea * vmax * cfg.dt / s.rest_lengths_c.minCoeff();
  CHECK(df_max < bound);
  // the structure recovers tension by the end of the run
  CHECK(rec.force_c.col(rec.steps() - 1).minCoeff() > 0.0);
}

TEST_CASE("clustered integrator reproduces a classic truss integration") {
  const Structure s = tensioned_prism();
  DynamicsConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_end = 1.0;
  cfg.damping_ratio = 0.0;
  cfg.newton_tol = 1e-9;

  // gentle kick: amplitude stays inside every string's slack margin
  IntegrateOptions opt;
  opt.initial_velocity = Eigen::VectorXd::Zero(18);
  opt.initial_velocity(9) = 0.002;
  opt.initial_velocity(11) = -0.001;

  const DeployRecord rec = integrate(s, cfg, opt);
  const Eigen::MatrixXd classic = test::classic_integrate(
      s, Eigen::VectorXd::Zero(18), opt.initial_velocity, cfg.dt, 1000,
      cfg.newton_tol);

  REQUIRE(classic.cols() == rec.coords.cols());
  double diff = 0.0, f_min = 1e300;
  for (int i = 0; i < rec.steps(); ++i) {
    diff = std::max(diff, (rec.coords.col(i) - classic.col(i)).cwiseAbs().maxCoeff());
    f_min = std::min(f_min, rec.force_c.col(i).segment(3, 6).minCoeff());
  }
  CHECK(f_min > 0.0);  // regime check: the comparison covers taut dynamics
  CHECK(diff < 1e-6);
}

TEST_CASE("rest-length actuation is applied at the recorded instants") {
  Structure s = two_node(ElementKind::String, 10.0, 10.0, 1e8, 1e-4);
  DynamicsConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_end = 0.5;
  cfg.damping_ratio = 0.3;
  cfg.newton_tol = 1e-6;

  IntegrateOptions opt;
  opt.rest_lengths_at = [](double t) {
    return Eigen::VectorXd::Constant(1, 10.0 - 0.02 * t);
  };

  const DeployRecord rec = integrate(s, cfg, opt);
  for (int i = 0; i < rec.steps(); i += 100)
    CHECK(rec.rest_lengths_c(0, i) ==
          doctest::Approx(10.0 - 0.02 * rec.times(i)).epsilon(1e-12));
  // shortening the rest length winds tension into the string at some point
  CHECK(rec.force_c.row(0).maxCoeff() > 0.0);
  // and the free end is dragged toward the anchor
  CHECK(rec.coords(3, rec.steps() - 1) < 10.0);
}

TEST_CASE("elastic energy follows the quadratic stored-work law") {
  const Structure taut = two_node(ElementKind::String, 1.001, 1.0);
  // 0.5 * E*A * (l - l0)^2 / l0 = 0.5 * 1e5 * 1e-6
  CHECK(elastic_energy(taut) == doctest::Approx(0.05).epsilon(1e-12));
  const Structure slack = two_node(ElementKind::String, 0.9, 1.0);
  CHECK(elastic_energy(slack) == 0.0);
  const Structure bar = two_node(ElementKind::Bar, 0.9, 1.0);
  CHECK(elastic_energy(bar) == doctest::Approx(0.5 * 1e5 * 0.01).epsilon(1e-12));

  // kinetic energy of a rigid translation: half the total mass times v^2
  const Structure s = tensioned_prism();
  Eigen::VectorXd v = Eigen::VectorXd::Zero(18);
  for (int i = 0; i < 6; ++i) v(3 * i) = 2.0;
  const double total_mass = evaluate_elements(s).mass.sum();
  CHECK(kinetic_energy(s, v) ==
        doctest::Approx(0.5 * total_mass * 4.0).epsilon(1e-10));
}
