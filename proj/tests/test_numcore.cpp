#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "tinycnn/numcore.hpp"
#include "tinycnn/rng.hpp"

using namespace tinycnn;

TEST(Kahan, CancellationCase) {
    const std::vector<float> terms{1e8f, 1.0f, -1e8f};
    EXPECT_EQ(kahan_sum<float>(terms), 1.0f);
    float naive = 0;
    for (float t : terms) naive += t;
    EXPECT_EQ(naive, 0.0f);
}

TEST(Kahan, TextbookUpdateLosesThisCase) {
    // The classic y/t/c update drops the 1 once |term| exceeds |sum|;
    // this is why the accumulator uses the Neumaier form.
    float sum = 0, c = 0;
    for (float term : {1e8f, 1.0f, -1e8f}) {
        const float y = term - c;
        const float t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    EXPECT_EQ(sum, 0.0f);
}

TEST(Kahan, EmptyAndSingle) {
    EXPECT_EQ(kahan_sum<float>(std::vector<float>{}), 0.0f);
    EXPECT_EQ(kahan_sum<float>(std::vector<float>{2.5f}), 2.5f);
    auto acc = kahan_add(KahanAccumulator<float>{}, 2.5f);
    EXPECT_EQ(acc.value(), 2.5f);
}

TEST(Kahan, MatchesDoubleOracleOnLongSequences) {
    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<float> terms(10000);
        for (auto& t : terms) t = static_cast<float>(rng.uniform(-1e8, 1e8) * std::pow(10.0, -rng.uniform(0, 8)));
        double exact = 0;
        for (float t : terms) exact += t;
        float naive = 0;
        for (float t : terms) naive += t;
        const float compensated = kahan_sum<float>(terms);
        // Within one float ulp of the correctly rounded double sum.
        const float rounded = static_cast<float>(exact);
        EXPECT_LE(std::abs(compensated - rounded), std::abs(std::nextafter(rounded, INFINITY) - rounded))
            << "trial " << trial;
        EXPECT_LE(std::abs(compensated - exact), std::abs(naive - exact) + 1e-3);
    }
}

TEST(Kahan, PermutationInvariantWithinOneUlp) {
    Rng rng(8);
    std::vector<float> terms(6728);
    for (auto& t : terms) t = static_cast<float>(rng.normal() * 0.05);
    double exact = 0;
    for (float t : terms) exact += t;
    const float rounded = static_cast<float>(exact);
    const float ulp = std::nextafter(std::abs(rounded), INFINITY) - std::abs(rounded);
    for (int p = 0; p < 10; ++p) {
        const auto perm = rng.permutation(terms.size());
        std::vector<float> shuffled(terms.size());
        for (std::size_t i = 0; i < perm.size(); ++i) shuffled[i] = terms[perm[i]];
        EXPECT_LE(std::abs(kahan_sum<float>(shuffled) - rounded), ulp);
    }
}

TEST(LeakyRelu, Values) {
    EXPECT_EQ(leaky_relu(2.0f), 2.0f);
    EXPECT_FLOAT_EQ(leaky_relu(-2.0f), -0.2f);
    EXPECT_EQ(leaky_relu(0.0f), 0.0f);
    EXPECT_FLOAT_EQ(leaky_relu_grad(-5.0f), 0.1f);
    EXPECT_EQ(leaky_relu_grad(3.0f), 1.0f);
    EXPECT_EQ(leaky_relu_grad(0.0f), 1.0f);
}

TEST(LeakyRelu, MonotoneAndGradientMatchesFiniteDifferences) {
    Rng rng(5);
    for (int i = 0; i < 1000; ++i) {
        const double a = rng.uniform(-10, 10);
        const double b = rng.uniform(-10, 10);
        if (a <= b) EXPECT_LE(leaky_relu(a), leaky_relu(b));
        if (std::abs(a) > 1e-2) {
            const double h = 1e-4;
            const double fd = (leaky_relu(a + h) - leaky_relu(a - h)) / (2 * h);
            EXPECT_NEAR(leaky_relu_grad(a), fd, 1e-3);
        }
    }
}

TEST(Clip, SaturationInteriorAndNaN) {
    EXPECT_EQ(clip(150.0f, 100.0f), 100.0f);
    EXPECT_EQ(clip(-150.0f, 100.0f), -100.0f);
    EXPECT_EQ(clip(-3.0f, 10.0f), -3.0f);
    EXPECT_FALSE(clip(std::numeric_limits<float>::quiet_NaN(), 100.0f).has_value());
    EXPECT_EQ(clip(std::numeric_limits<float>::infinity(), 100.0f), 100.0f);
}

TEST(Clip, Idempotent) {
    Rng rng(9);
    for (int i = 0; i < 1000; ++i) {
        const float x = static_cast<float>(rng.uniform(-500, 500));
        const float once = *clip(x, 100.0f);
        EXPECT_EQ(*clip(once, 100.0f), once);
    }
}

TEST(Softmax, UniformAndOverflowSafe) {
    std::vector<float> p(3);
    softmax<float>(std::vector<float>{0, 0, 0}, p);
    for (float v : p) EXPECT_NEAR(v, 1.0f / 3, 1e-7);
    softmax<float>(std::vector<float>{1000, 1000, 1000}, p);
    for (float v : p) {
        EXPECT_TRUE(std::isfinite(v));
        EXPECT_NEAR(v, 1.0f / 3, 1e-7);
    }
}

TEST(Softmax, AnalyticCase) {
    std::vector<double> p(3);
    softmax<double>(std::vector<double>{std::log(2.0), 0, 0}, p);
    EXPECT_NEAR(p[0], 0.5, 1e-15);
    EXPECT_NEAR(p[1], 0.25, 1e-15);
    EXPECT_NEAR(p[2], 0.25, 1e-15);
}

TEST(Softmax, ShiftInvarianceAndNormalization) {
    Rng rng(21);
    for (int trial = 0; trial < 200; ++trial) {
        const auto n = 2 + rng.below(10);
        std::vector<float> logits(n), shifted(n), p(n), q(n);
        // Logits on a 1/1024 grid and integer shifts keep logits + c exact in
        // float, so any difference would come from softmax itself.
        const float c = static_cast<float>(static_cast<int>(rng.below(101)) - 50);
        for (std::size_t i = 0; i < n; ++i) {
            logits[i] = std::round(static_cast<float>(rng.uniform(-20, 20)) * 1024.0f) / 1024.0f;
            shifted[i] = logits[i] + c;
        }
        softmax<float>(logits, p);
        softmax<float>(shifted, q);
        float total = 0;
        for (std::size_t i = 0; i < n; ++i) {
            EXPECT_NEAR(p[i], q[i], 1e-6);
            EXPECT_GE(p[i], 0.0f);
            EXPECT_LE(p[i], 1.0f);
            total += p[i];
        }
        EXPECT_NEAR(total, 1.0f, 1e-6);
        EXPECT_EQ(argmax<float>(p), argmax<float>(logits));
    }
}

TEST(Softmax, NonFiniteLogitFaults) {
    std::vector<float> p(2);
    EXPECT_THROW(softmax<float>(std::vector<float>{std::numeric_limits<float>::quiet_NaN(), 0}, p), NumericFault);
    EXPECT_THROW(softmax<float>(std::vector<float>{std::numeric_limits<float>::infinity(), 0}, p), NumericFault);
}

TEST(CrossEntropy, Values) {
    EXPECT_EQ(cross_entropy<float>(std::vector<float>{1, 0, 0}, 0), 0.0f);
    EXPECT_NEAR(cross_entropy<double>(std::vector<double>{1.0 / 3, 1.0 / 3, 1.0 / 3}, 1), 1.0986122886681098, 1e-12);
    EXPECT_NEAR(cross_entropy<double>(std::vector<double>{1, 0, 0}, 2), 27.631021115928547, 1e-9);
    EXPECT_THROW(cross_entropy<float>(std::vector<float>{1, 0}, 2), std::out_of_range);
    EXPECT_THROW(cross_entropy<float>(std::vector<float>{1, 0}, -1), std::out_of_range);
}

TEST(Argmax, TiesGoToLowestIndex) {
    EXPECT_EQ(argmax<float>(std::vector<float>{0.2f, 0.5f, 0.5f}), 1);
    EXPECT_EQ(argmax<float>(std::vector<float>{1, 1, 1}), 0);
}
