#include <doctest.h>

#include <cmath>
#include <random>

#include "mmpc/kinematics.hpp"
#include "oracles.hpp"

using namespace mmpc;

namespace {

constexpr double kPi = 3.14159265358979323846;

DhChain reference_chain() { return DhChain::from_file("data/chains/fetch8.dh"); }
JointLimits reference_limits() {
  return JointLimits::from_file("data/chains/fetch8.limits", 8);
}

DhChain one_link_planar() {
  return DhChain({DhRow{1.0, 0.0, 0.0, 0.0}});
}

// Random configurations inside the limits, skipping the Euler-degenerate
// band the shipped trajectories never enter.
std::vector<Eigen::VectorXd> sample_configs(const DhChain& chain,
                                            const JointLimits& limits, int n,
                                            unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Eigen::VectorXd> out;
  while (static_cast<int>(out.size()) < n) {
    Eigen::VectorXd theta(chain.dof());
    for (int i = 0; i < chain.dof(); ++i) {
      const double lo = std::max(limits.lower[i], -1.2);
      const double hi = std::min(limits.upper[i], 1.2);
      theta[i] = lo + (hi - lo) * unit(rng);
    }
    if (std::abs(forward_kinematics(chain, theta)[4]) > 1.3) continue;
    out.push_back(theta);
  }
  return out;
}

}  // namespace

TEST_SUITE("kinematics") {

TEST_CASE("home pose of the reference chain matches the frozen constant") {
  const DhChain chain = reference_chain();
  const Vector6d pose = forward_kinematics(chain, Eigen::VectorXd::Zero(8));
  // Regression values from an independent elementary-transform composition.
  CHECK(pose[0] == doctest::Approx(0.503803802211496).epsilon(1e-12));
  CHECK(std::abs(pose[1]) < 1e-12);
  CHECK(pose[2] == doctest::Approx(0.950857534694683).epsilon(1e-12));
  CHECK(std::abs(pose[3]) < 1e-12);
  CHECK(pose[4] == doctest::Approx(0.15).epsilon(1e-12));
  CHECK(std::abs(pose[5]) < 1e-12);
}

TEST_CASE("one-link planar chain at zero") {
  const DhChain chain = one_link_planar();
  Eigen::VectorXd theta(1);
  theta << 0.0;
  const Vector6d pose = forward_kinematics(chain, theta);
  CHECK(pose[0] == doctest::Approx(1.0));
  CHECK(pose[1] == doctest::Approx(0.0));
  CHECK(pose[2] == doctest::Approx(0.0));
  CHECK(pose.tail<3>().norm() == doctest::Approx(0.0));
}

TEST_CASE("one-link planar chain quarter turn") {
  const DhChain chain = one_link_planar();
  Eigen::VectorXd theta(1);
  theta << kPi / 2;
  const Vector6d pose = forward_kinematics(chain, theta);
  CHECK(pose[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(pose[1] == doctest::Approx(1.0));
  CHECK(pose[5] == doctest::Approx(kPi / 2));
}

TEST_CASE("forward kinematics agrees with the transform oracle on random configs") {
  const DhChain chain = reference_chain();
  const JointLimits limits = reference_limits();
  for (const auto& theta : sample_configs(chain, limits, 50, 11)) {
    const Vector6d lib = forward_kinematics(chain, theta);
    const Vector6d orc = test::oracle_forward_kinematics(chain, theta);
    CHECK((lib - orc).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("dimension mismatch raises a configuration error") {
  const DhChain chain = reference_chain();
  CHECK_THROWS_AS(forward_kinematics(chain, Eigen::VectorXd::Zero(5)), ConfigError);
  CHECK_THROWS_AS(jacobian(chain, Eigen::VectorXd::Zero(9)), ConfigError);
}

TEST_CASE("one-link jacobian column") {
  const DhChain chain = one_link_planar();
  Eigen::VectorXd theta(1);
  theta << 0.0;
  const Eigen::MatrixXd j = jacobian(chain, theta);
  Eigen::VectorXd expected(6);
  expected << 0, 1, 0, 0, 0, 1;
  CHECK((j.col(0) - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("analytic jacobian matches central finite differences") {
  const DhChain chain = reference_chain();
  const JointLimits limits = reference_limits();
  double worst = 0;
  for (const auto& theta : sample_configs(chain, limits, 100, 23)) {
    const Eigen::MatrixXd analytic = jacobian(chain, theta);
    const Eigen::MatrixXd fd = test::finite_difference_jacobian(chain, theta, 1e-6);
    worst = std::max(worst, (analytic - fd).cwiseAbs().maxCoeff());
  }
  CHECK(worst < 1e-5);
}

TEST_CASE("jacobian is pure: identical inputs give identical outputs") {
  const DhChain chain = reference_chain();
  Eigen::VectorXd theta(8);
  theta << 0.3, -0.2, 0.5, 0.1, -0.4, 0.2, 0.6, -0.1;
  const Eigen::MatrixXd a = jacobian(chain, theta);
  const Eigen::MatrixXd b = jacobian(chain, theta);
  CHECK(a == b);
  const Vector6d fa = forward_kinematics(chain, theta);
  const Vector6d fb = forward_kinematics(chain, theta);
  CHECK(fa == fb);
}

TEST_CASE("euler-rate map flag trips only next to the singularity") {
  // A single pitch joint: rotation about y needs alpha = -pi/2 to put the
  // joint axis on the world y axis.
  const DhChain chain({DhRow{0.0, -kPi / 2, 0.0, 0.0}, DhRow{0.3, kPi / 2, 0.0, 0.0}});
  Eigen::VectorXd theta(2);
  theta << -kPi / 2 + 1e-10, 0.0;
  JacobianHealth health;
  jacobian(chain, theta, &health);
  CHECK(health.near_singular);
  theta << 0.5, 0.2;
  jacobian(chain, theta, &health);
  CHECK_FALSE(health.near_singular);
  CHECK(health.condition < 10.0);
}

TEST_CASE("base_step straight drive, rotated heading, pure spin") {
  BaseState s{0, 0, 0};
  BaseState a = base_step(s, 1.0, 0.0, 0.1);
  CHECK(a.x == doctest::Approx(0.1));
  CHECK(a.y == doctest::Approx(0.0));
  CHECK(a.phi == doctest::Approx(0.0));

  BaseState r{0, 0, kPi / 2};
  BaseState b = base_step(r, 1.0, 0.0, 0.1);
  CHECK(std::abs(b.x) < 1e-15);
  CHECK(b.y == doctest::Approx(0.1));
  CHECK(b.phi == doctest::Approx(kPi / 2));

  BaseState c = base_step(s, 0.0, 2.0, 0.1);
  CHECK(c.x == doctest::Approx(0.0));
  CHECK(c.y == doctest::Approx(0.0));
  CHECK(c.phi == doctest::Approx(0.2));
}

TEST_CASE("base_step composition equals the closed-form sum for constant inputs") {
  BaseState s{0.2, -0.1, 0.7};
  const double v = 0.8, tau = 0.05;
  BaseState it = s;
  for (int k = 0; k < 40; ++k) it = base_step(it, v, 0.0, tau);
  CHECK(it.x == doctest::Approx(s.x + 40 * tau * v * std::cos(s.phi)).epsilon(1e-12));
  CHECK(it.y == doctest::Approx(s.y + 40 * tau * v * std::sin(s.phi)).epsilon(1e-12));
  CHECK(it.phi == doctest::Approx(s.phi));
}

TEST_CASE("input matrix layout: base column and jacobian block") {
  const DhChain chain = reference_chain();
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(8);
  const double tau = 0.1;

  SUBCASE("zero heading") {
    const Eigen::MatrixXd b = whole_body_input_matrix(chain, theta, tau);
    CHECK(b.rows() == 6);
    CHECK(b.cols() == 9);
    CHECK(b(0, 0) == doctest::Approx(tau));
    CHECK(b(1, 0) == doctest::Approx(0.0));
    CHECK(b.col(0).tail<4>().cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("quarter heading") {
    theta[0] = kPi / 2;
    const Eigen::MatrixXd b = whole_body_input_matrix(chain, theta, tau);
    CHECK(std::abs(b(0, 0)) < 1e-15);
    CHECK(b(1, 0) == doctest::Approx(tau));
  }
  SUBCASE("block assembly matches independently built pieces") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
      for (int i = 0; i < 8; ++i) theta[i] = u(rng);
      const Eigen::MatrixXd b = whole_body_input_matrix(chain, theta, tau);
      const Eigen::MatrixXd j = jacobian(chain, theta);
      Eigen::MatrixXd expected(6, 9);
      expected.setZero();
      expected(0, 0) = std::cos(theta[0]);
      expected(1, 0) = std::sin(theta[0]);
      expected.rightCols(8) = j;
      expected *= tau;
      CHECK((b - expected).cwiseAbs().maxCoeff() == 0.0);
      CHECK(b.col(0).tail<4>().cwiseAbs().maxCoeff() == 0.0);
    }
  }
}

TEST_CASE("whole-body pose translates the arm pose by the base position") {
  const DhChain chain = reference_chain();
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(8);

  SUBCASE("identity frames at the origin") {
    const Vector6d arm = forward_kinematics(chain, theta);
    const Vector6d whole = whole_body_pose(chain, BaseState{0, 0, 0}, theta);
    CHECK((arm - whole).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("pure translation") {
    const Vector6d arm = forward_kinematics(chain, theta);
    const Vector6d whole = whole_body_pose(chain, BaseState{1.0, 2.0, 0}, theta);
    CHECK(whole[0] == doctest::Approx(arm[0] + 1.0));
    CHECK(whole[1] == doctest::Approx(arm[1] + 2.0));
    CHECK((whole.tail<4>() - arm.tail<4>()).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("random configurations match the transform oracle") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-0.8, 0.8);
    for (int trial = 0; trial < 10; ++trial) {
      for (int i = 0; i < 8; ++i) theta[i] = u(rng);
      const BaseState base{u(rng), u(rng), theta[0]};
      const Vector6d whole = whole_body_pose(chain, base, theta);
      Vector6d expected = test::oracle_forward_kinematics(chain, theta);
      expected[0] += base.x;
      expected[1] += base.y;
      CHECK((whole - expected).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
  SUBCASE("heading mismatch is rejected") {
    CHECK_THROWS_AS(whole_body_pose(chain, BaseState{0, 0, 0.5}, theta), ConfigError);
  }
}

TEST_CASE("chain and limit file loading") {
  const DhChain chain = reference_chain();
  CHECK(chain.dof() == 8);
  const JointLimits limits = reference_limits();
  CHECK(limits.contains(Eigen::VectorXd::Zero(8)));
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(8);
  theta[1] = 99.0;
  CHECK_FALSE(limits.contains(theta));
  CHECK(limits.clamp(theta)[1] == doctest::Approx(1.6057));
  CHECK_THROWS_AS(DhChain::from_file("data/chains/missing.dh"), IoError);
  CHECK_THROWS_AS(JointLimits::from_file("data/chains/fetch8.limits", 5), ConfigError);
}

}  // TEST_SUITE
