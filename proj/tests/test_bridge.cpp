#include <gtest/gtest.h>

#include <chrono>
#include <random>
#include <thread>

#include "geoshap/bridge.hpp"
#include "geoshap/errors.hpp"
#include "geoshap/explainer.hpp"

namespace geoshap {
namespace {

std::string server(const std::string& args = "") {
  return std::string("'") + GEOSHAP_ECHO_SERVER + "' " + args;
}

TEST(Bridge, RowSum) {
  auto bridge = BridgePredictor::connect(server(), 2, {"a", "b"});
  EXPECT_EQ(bridge->arity(), 2);
  EXPECT_FALSE(bridge->concurrency_safe());
  EXPECT_EQ(bridge->predict(Matrix{{1, 2}, {3, 4}}), Eigen::Vector2d(3, 7));
  EXPECT_EQ(bridge->predict(Matrix(0, 2)).size(), 0);
  EXPECT_EQ(bridge->close(), 0);
  EXPECT_EQ(bridge->close(), 0);
  EXPECT_THROW(bridge->predict(Matrix{{1, 2}}), PredictorError);
}

TEST(Bridge, ShutdownExitsCleanlyOnDestruction) {
  auto bridge = bridge_connect(server(), 3);
  EXPECT_NE(bridge->descriptor().find("cmd:"), std::string::npos);
  bridge.reset();
}

TEST(Bridge, ArityMismatch) {
  try {
    BridgePredictor::connect(server("--advertise 3"), 4);
    FAIL();
  } catch (const PredictorError& e) {
    EXPECT_NE(std::string(e.what()).find("arity mismatch"), std::string::npos);
  }
}

TEST(Bridge, HandshakeTimeout) {
  const auto start = std::chrono::steady_clock::now();
  try {
    BridgePredictor::connect(server("--silent"), 2, {}, std::chrono::milliseconds(200));
    FAIL();
  } catch (const PredictorError& e) {
    EXPECT_NE(std::string(e.what()).find("timed out"), std::string::npos);
  }
  EXPECT_LT(std::chrono::steady_clock::now() - start, std::chrono::seconds(10));
}

TEST(Bridge, LaunchFailureIsPredictorError) {
  EXPECT_THROW(BridgePredictor::connect("exit 7", 2, {}, std::chrono::milliseconds(2000)),
               PredictorError);
}

TEST(Bridge, MalformedFrameIsProtocolError) {
  auto bridge = BridgePredictor::connect(server("--bad-frame"), 2);
  try {
    bridge->predict(Matrix{{1, 2}});
    FAIL();
  } catch (const ProtocolError& e) {
    EXPECT_NE(std::string(e.what()).find("this is not json"), std::string::npos);
  }
}

TEST(Bridge, UnknownFrameTypeIsProtocolError) {
  auto bridge = BridgePredictor::connect(server("--wrong-type"), 2);
  EXPECT_THROW(bridge->predict(Matrix{{1, 2}}), ProtocolError);
}

TEST(Bridge, WrongLengthIsProtocolError) {
  auto bridge = BridgePredictor::connect(server("--short-reply"), 2);
  EXPECT_THROW(bridge->predict(Matrix{{1, 2}, {3, 4}}), ProtocolError);
}

TEST(Bridge, PerRequestErrorKeepsConnection) {
  auto bridge = BridgePredictor::connect(server("--error-on 1"), 2);
  try {
    bridge->predict(Matrix{{1, 2}});
    FAIL();
  } catch (const PredictorError& e) {
    EXPECT_NE(std::string(e.what()).find("refused"), std::string::npos);
  }
  EXPECT_EQ(bridge->predict(Matrix{{1, 2}}), Vector::Constant(1, 3.0));
}

TEST(Bridge, ServerDeathIsReported) {
  auto bridge = BridgePredictor::connect(server("--die-after 1"), 2);
  EXPECT_EQ(bridge->predict(Matrix{{1, 1}}), Vector::Constant(1, 2.0));
  EXPECT_THROW(bridge->predict(Matrix{{1, 1}}), PredictorError);
  EXPECT_NE(bridge->close(), 0);
}

TEST(Bridge, ParallelServerHandlesConcurrentCallers) {
  auto bridge = BridgePredictor::connect(server("--parallel"), 3);
  EXPECT_TRUE(bridge->concurrency_safe());
  std::vector<std::thread> threads;
  std::vector<bool> ok(8, false);
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&, t] {
      bool good = true;
      for (int r = 0; r < 20; ++r) {
        Matrix x = Matrix::Constant(5, 3, t + r);
        good = good && bridge->predict(x) == Vector::Constant(5, 3.0 * (t + r));
      }
      ok[t] = good;
    });
  }
  for (auto& th : threads) th.join();
  for (bool b : ok) EXPECT_TRUE(b);
}

TEST(Bridge, PreservesValuesBitExactly) {
  std::mt19937_64 gen(5);
  std::normal_distribution<double> d(0, 1e6);
  auto bridge = BridgePredictor::connect(server("--mode ols --coefs 0,1"), 1);
  Matrix x(200, 1);
  for (Eigen::Index i = 0; i < 200; ++i) x(i, 0) = d(gen) / 3.0;
  const Vector y = bridge->predict(x);
  for (Eigen::Index i = 0; i < 200; ++i) EXPECT_EQ(y[i], x(i, 0));
}

TEST(Bridge, ExplanationsMatchInProcessOls) {
  const OlsModel model(Eigen::Vector4d(3, 2, 1, -0.5));
  auto bridge = BridgePredictor::connect(server("--mode ols --coefs 3,2,1,-0.5"), 3);
  std::mt19937_64 gen(6);
  std::uniform_real_distribution<double> u(-2, 2);
  Matrix x(12, 3), bg(6, 3);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = u(gen);
  for (Eigen::Index i = 0; i < bg.size(); ++i) bg.data()[i] = u(gen);
  const GeoSpec spec = GeoSpec::unnamed(3, {2});
  const auto background = BackgroundData::uniform(bg);
  ExplainOptions options;
  options.workers = 4;
  const auto local = explain_batch(model, x, spec, background, options);
  const auto remote = explain_batch(*bridge, x, spec, background, options);
  EXPECT_LE((local.phi_main - remote.phi_main).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((local.phi_geo - remote.phi_geo).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(local.base_value, remote.base_value, 1e-12);
}

}  // namespace
}  // namespace geoshap
