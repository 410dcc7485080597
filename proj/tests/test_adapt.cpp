#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "gast/adapt.hpp"
#include "gast/grad_check.hpp"

using namespace gast;

namespace {

LinearHead zero_head(int in) {
  LinearHead h;
  h.w = Tensor::zeros({in, 2}, true);
  h.b = Tensor::zeros({2}, true);
  return h;
}

}  // namespace

TEST_CASE("sentiment_loss is ln 2 for an indifferent classifier") {
  Rng rng(61);
  Tape tape;
  Tensor H = Tensor::uniform({4, 3}, -1, 1, rng);
  Tensor loss = sentiment_loss(tape, H, zero_head(3), {1, 0, 1, 0});
  REQUIRE(loss.value() == Catch::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("sentiment_loss is near zero for confident correct predictions") {
  Tape tape;
  // one feature; w pushes class 1 for +, class 0 for -
  LinearHead head = zero_head(1);
  head.w.mutable_data() = {-30.0, 30.0};
  Tensor H = Tensor::from_data({2, 1}, {1.0, -1.0});
  Tensor loss = sentiment_loss(tape, H, head, {1, 0});
  REQUIRE(loss.value() >= 0.0);
  REQUIRE(loss.value() < 1e-9);
}

TEST_CASE("sentiment_loss on a hand batch matches the direct formula") {
  Tape tape;
  LinearHead head = zero_head(1);
  head.w.mutable_data() = {0.0, 1.0};  // logit1 = h, logit0 = 0
  Tensor H = Tensor::from_data({2, 1}, {0.8, -0.4});
  auto p1 = [](double h) { return std::exp(h) / (1.0 + std::exp(h)); };
  const double direct = -0.5 * (std::log(p1(0.8)) + std::log(1.0 - p1(-0.4)));
  Tensor loss = sentiment_loss(tape, H, head, {1, 0});
  REQUIRE(loss.value() == Catch::Approx(direct).epsilon(1e-12));

  REQUIRE_THROWS_AS(sentiment_loss(tape, H, head, {1, -1}), ValueError);
  REQUIRE_THROWS_AS(sentiment_loss(tape, H, head, {1}), ShapeError);
}

TEST_CASE("domain_loss_reversed equals plain cross-entropy with flipped labels") {
  Rng rng(62);
  Tape tape;
  Tensor H = Tensor::uniform({6, 4}, -1, 1, rng);
  LinearHead head;
  head.w = Tensor::uniform({4, 2}, -1, 1, rng, true);
  head.b = Tensor::uniform({2}, -0.5, 0.5, rng, true);
  std::vector<int> domains = {0, 1, 0, 1, 1, 0};

  Tensor reversed = domain_loss_reversed(tape, H, head, domains);

  // direct evaluation: binary CE of the target-class probability vs 1-d
  Tensor probs = head_probs(tape, H, head);
  double direct = 0.0;
  for (int i = 0; i < 6; ++i) {
    const double p = probs.at(i, 1);
    const int y = 1 - domains[static_cast<size_t>(i)];
    direct -= y == 1 ? std::log(p) : std::log(1.0 - p);
  }
  direct /= 6.0;
  REQUIRE(reversed.value() == Catch::Approx(direct).margin(1e-12));

  // indifferent discriminator: ln 2 regardless of labels
  Tensor flat = domain_loss_reversed(tape, H, zero_head(4), domains);
  REQUIRE(flat.value() == Catch::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("perfect discriminator scores a large clamped loss against flipped labels") {
  Tape tape;
  LinearHead head = zero_head(1);
  head.w.mutable_data() = {-80.0, 80.0};  // saturates the softmax
  Tensor H = Tensor::from_data({2, 1}, {1.0, -1.0});
  std::vector<int> domains = {1, 0};  // discriminator is exactly right
  Tensor loss = domain_loss_reversed(tape, H, head, domains);
  REQUIRE(loss.value() == Catch::Approx(-std::log(ops::kLogEps)).epsilon(1e-6));
}

TEST_CASE("ssl_entropy_loss spans [0, ln 2]") {
  Tape tape;
  Rng rng(63);
  Tensor H = Tensor::uniform({5, 3}, -1, 1, rng);
  std::vector<int> unlabeled(5, -1);

  Tensor uniform = ssl_entropy_loss(tape, H, zero_head(3), unlabeled);
  REQUIRE(uniform.value() == Catch::Approx(std::log(2.0)).epsilon(1e-12));

  LinearHead confident = zero_head(3);
  confident.w.mutable_data() = {90.0, -90.0, 90.0, -90.0, 90.0, -90.0};
  Tensor sharp = ssl_entropy_loss(tape, H, confident, unlabeled);
  REQUIRE(sharp.value() >= 0.0);
  REQUIRE(sharp.value() < 1e-9);

  REQUIRE_THROWS_AS(ssl_entropy_loss(tape, H, confident, {1, -1, -1, -1, -1}), ValueError);

  for (int rep = 0; rep < 20; ++rep) {
    LinearHead head;
    head.w = Tensor::uniform({3, 2}, -3, 3, rng, true);
    head.b = Tensor::uniform({2}, -1, 1, rng, true);
    Tensor Hr = Tensor::uniform({4, 3}, -2, 2, rng);
    Tensor e = ssl_entropy_loss(tape, Hr, head, {-1, -1, -1, -1});
    REQUIRE(e.value() >= 0.0);
    REQUIRE(e.value() <= std::log(2.0) + 1e-12);
  }
}

TEST_CASE("ssl_entropy_loss value for a 0.9/0.1 prediction") {
  Tape tape;
  LinearHead head = zero_head(1);
  head.w.mutable_data() = {0.0, std::log(9.0)};  // probs (0.1, 0.9) at h = 1
  Tensor H = Tensor::from_data({1, 1}, {1.0});
  Tensor e = ssl_entropy_loss(tape, H, head, {-1});
  const double direct = -(0.9 * std::log(0.9) + 0.1 * std::log(0.1));
  REQUIRE(e.value() == Catch::Approx(direct).epsilon(1e-10));
  REQUIRE(e.value() == Catch::Approx(0.3251).margin(5e-5));
}

TEST_CASE("total_loss is the exact weighted sum") {
  Tape tape;
  Tensor lc = Tensor::scalar(0.5);
  Tensor ld = Tensor::scalar(0.7);
  Tensor la = Tensor::scalar(0.2);
  LossWeights w;
  REQUIRE(total_loss(tape, lc, ld, la, w).value() == Catch::Approx(1.36).margin(1e-15));

  LossWeights source_only{1.0, 0.0, 0.0};
  REQUIRE(total_loss(tape, lc, ld, la, source_only).value() == 0.5);
}

TEST_CASE("total_loss gradient is the weighted sum of component gradients") {
  Rng rng(64);
  Tensor H = Tensor::uniform({4, 3}, -1, 1, rng, true);
  LinearHead sent;
  sent.w = Tensor::uniform({3, 2}, -1, 1, rng, true);
  sent.b = Tensor::uniform({2}, -0.5, 0.5, rng, true);
  LinearHead dom;
  dom.w = Tensor::uniform({3, 2}, -1, 1, rng, true);
  dom.b = Tensor::uniform({2}, -0.5, 0.5, rng, true);
  std::vector<int> labels = {1, 0, 1, 0};
  std::vector<int> domains = {0, 1, 0, 1};
  std::vector<int> unlabeled(4, -1);
  LossWeights w{1.0, 1.0, 0.8};

  auto grad_of = [&](auto loss_fn) {
    H.zero_grad();
    sent.w.zero_grad();
    Tape tape;
    Tensor loss = loss_fn(tape);
    tape.backward(loss);
    return H.has_grad() ? H.grad() : std::vector<double>(H.data().size(), 0.0);
  };

  auto g_c = grad_of([&](Tape& t) { return sentiment_loss(t, H, sent, labels); });
  auto g_d = grad_of([&](Tape& t) { return domain_loss_reversed(t, H, dom, domains); });
  auto g_a = grad_of([&](Tape& t) { return ssl_entropy_loss(t, H, sent, unlabeled); });
  auto g_total = grad_of([&](Tape& t) {
    return total_loss(t, sentiment_loss(t, H, sent, labels), domain_loss_reversed(t, H, dom, domains),
                      ssl_entropy_loss(t, H, sent, unlabeled), w);
  });
  for (size_t i = 0; i < g_total.size(); ++i)
    REQUIRE(g_total[i] == Catch::Approx(w.lambda_c * g_c[i] + w.lambda_d * g_d[i] + w.lambda_a * g_a[i]).margin(1e-12));

  // doubling lambda_a doubles the entropy path's contribution
  LossWeights w2{0.0, 0.0, 1.6};
  auto g_double = grad_of([&](Tape& t) {
    return total_loss(t, sentiment_loss(t, H, sent, labels), domain_loss_reversed(t, H, dom, domains),
                      ssl_entropy_loss(t, H, sent, unlabeled), w2);
  });
  for (size_t i = 0; i < g_double.size(); ++i)
    REQUIRE(g_double[i] == Catch::Approx(2.0 * 0.8 * g_a[i]).margin(1e-12));
}

TEST_CASE("grl is the identity forward and negates gradients backward") {
  Rng rng(65);
  Tensor x = Tensor::uniform({3, 2}, -1, 1, rng, true);

  Tape tape;
  Tensor y = grl(tape, x, 1.0);
  REQUIRE(y.data() == x.data());  // bit-identical forward

  Tensor loss = ops::sum_all(tape, ops::mul(tape, y, y));
  tape.backward(loss);
  for (long i = 0; i < x.numel(); ++i)
    REQUIRE(x.grad()[static_cast<size_t>(i)] ==
            Catch::Approx(-2.0 * x.data()[static_cast<size_t>(i)]).margin(1e-12));

  // lambda = 0 freezes the upstream entirely
  x.zero_grad();
  Tape t2;
  Tensor y2 = grl(t2, x, 0.0);
  Tensor loss2 = ops::sum_all(t2, ops::mul(t2, y2, y2));
  t2.backward(loss2);
  for (double g : x.grad()) REQUIRE(g == 0.0);

  // two reversals with lambda 1 restore the original gradient
  x.zero_grad();
  Tape t3;
  Tensor y3 = grl(t3, grl(t3, x, 1.0), 1.0);
  Tensor loss3 = ops::sum_all(t3, ops::mul(t3, y3, y3));
  t3.backward(loss3);
  for (long i = 0; i < x.numel(); ++i)
    REQUIRE(x.grad()[static_cast<size_t>(i)] ==
            Catch::Approx(2.0 * x.data()[static_cast<size_t>(i)]).margin(1e-12));
}

TEST_CASE("grl_domain_loss: forward plain, discriminator plain, features negated") {
  Rng rng(66);
  Tensor H = Tensor::uniform({4, 3}, -1, 1, rng, true);
  LinearHead dom;
  dom.w = Tensor::uniform({3, 2}, -1, 1, rng, true);
  dom.b = Tensor::uniform({2}, -0.5, 0.5, rng, true);
  std::vector<int> domains = {0, 1, 1, 0};

  // plain true-label CE for reference
  auto run = [&](bool use_grl) {
    H.zero_grad();
    dom.w.zero_grad();
    dom.b.zero_grad();
    Tape tape;
    Tensor feats = use_grl ? H : H;  // grl applied inside grl_domain_loss only
    Tensor loss;
    if (use_grl) {
      loss = grl_domain_loss(tape, feats, dom, domains, 1.0);
    } else {
      Tensor probs = head_probs(tape, feats, dom);
      std::vector<double> y(domains.size());
      for (size_t i = 0; i < domains.size(); ++i) y[i] = domains[i];
      loss = ops::binary_cross_entropy(tape, ops::select_column(tape, probs, 1),
                                       Tensor::from_data({4}, y));
    }
    tape.backward(loss);
    struct Out {
      double loss;
      std::vector<double> h_grad, w_grad;
    } o;
    o.loss = loss.value();
    o.h_grad = H.grad();
    o.w_grad = dom.w.grad();
    return o;
  };

  auto grl_out = run(true);
  auto plain_out = run(false);
  REQUIRE(grl_out.loss == plain_out.loss);  // identity forward
  for (size_t i = 0; i < grl_out.w_grad.size(); ++i)
    REQUIRE(grl_out.w_grad[i] == Catch::Approx(plain_out.w_grad[i]).margin(1e-12));
  for (size_t i = 0; i < grl_out.h_grad.size(); ++i)
    REQUIRE(grl_out.h_grad[i] == Catch::Approx(-plain_out.h_grad[i]).margin(1e-12));
}

TEST_CASE("losses agree with the finite-difference oracle") {
  Rng rng(67);
  LinearHead sent;
  sent.w = Tensor::uniform({3, 2}, -1, 1, rng, true);
  sent.b = Tensor::uniform({2}, -0.5, 0.5, rng, true);
  std::vector<int> labels = {1, 0, 1};
  std::vector<int> unlabeled = {-1, -1, -1};

  double err = grad_check(
      [&](Tape& t, const Tensor& H) { return sentiment_loss(t, H, sent, labels); },
      Tensor::uniform({3, 3}, -1, 1, rng), 1e-5);
  REQUIRE(err <= 1e-5);

  err = grad_check(
      [&](Tape& t, const Tensor& H) { return ssl_entropy_loss(t, H, sent, unlabeled); },
      Tensor::uniform({3, 3}, -1, 1, rng), 1e-5);
  REQUIRE(err <= 1e-5);

  std::vector<int> domains = {0, 1, 0};
  err = grad_check(
      [&](Tape& t, const Tensor& H) { return domain_loss_reversed(t, H, sent, domains); },
      Tensor::uniform({3, 3}, -1, 1, rng), 1e-5);
  REQUIRE(err <= 1e-5);
}
