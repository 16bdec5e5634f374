/* Copyright 2026 The attnshare Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "attnshare/errors.h"
#include "attnshare/numerics.h"
#include "attnshare/rng.h"
#include "attnshare/sharing.h"
#include "gtest/gtest.h"
#include "oracles.h"

namespace attnshare {
namespace {

class SharingTest : public ::testing::Test {
 protected:
  AttentionConfig cfg_{2, 4, 12, 3};
  Rng rng_{21, RngStream::kTest};
  CacheState cache_{3};
};

TEST_F(SharingTest, RefreshReturnsFullAttentionBitwise) {
  const QKV qkv = oracle::random_qkv(rng_, 2, 12, 4);
  const Tensor out = wars_refresh(qkv, cfg_, cache_, 1, Branch::kCond, 0);
  EXPECT_TRUE(bitwise_equal(out, full_attention(qkv, cfg_)));
  ASSERT_TRUE(cache_.wars_residual(1, Branch::kCond));
  EXPECT_EQ(cache_.wars_residual(1, Branch::kCond)->step, 0);
  EXPECT_FALSE(cache_.wars_residual(1, Branch::kUncond));
  EXPECT_FALSE(cache_.wars_residual(0, Branch::kCond));
}

TEST_F(SharingTest, OutputMinusResidualIsWindowAttention) {
  const QKV qkv = oracle::random_qkv(rng_, 2, 12, 4);
  const Tensor out = wars_refresh(qkv, cfg_, cache_, 0, Branch::kCond, 0);
  const Tensor& residual = cache_.wars_residual(0, Branch::kCond)->value;
  // O - (O - W) recovers W up to one float rounding of the subtraction.
  EXPECT_LT(max_abs_diff(sub(out, residual), window_attention(qkv, cfg_)), 1e-6f);
}

TEST_F(SharingTest, WideWindowCachesZeroResidual) {
  const AttentionConfig wide{2, 4, 12, 12};
  const QKV qkv = oracle::random_qkv(rng_, 2, 12, 4);
  wars_refresh(qkv, wide, cache_, 0, Branch::kUncond, 0);
  for (float v : cache_.wars_residual(0, Branch::kUncond)->value.data()) {
    EXPECT_EQ(v, 0.0f);
  }
}

TEST_F(SharingTest, ReuseWithStationaryInputsRecoversFullAttention) {
  const QKV qkv = oracle::random_qkv(rng_, 2, 12, 4);
  wars_refresh(qkv, cfg_, cache_, 2, Branch::kCond, 3);
  const Tensor reused = wars_reuse(qkv, cfg_, cache_, 2, Branch::kCond, 7);
  EXPECT_LT(max_abs_diff(reused, full_attention(qkv, cfg_)), 1e-6f);
}

TEST_F(SharingTest, ReuseDoesNotTouchCache) {
  const QKV a = oracle::random_qkv(rng_, 2, 12, 4);
  const QKV b = oracle::random_qkv(rng_, 2, 12, 4);
  wars_refresh(a, cfg_, cache_, 0, Branch::kCond, 0);
  const Tensor before = cache_.wars_residual(0, Branch::kCond)->value;
  wars_reuse(b, cfg_, cache_, 0, Branch::kCond, 1);
  wars_reuse(b, cfg_, cache_, 0, Branch::kCond, 2);
  EXPECT_TRUE(bitwise_equal(cache_.wars_residual(0, Branch::kCond)->value, before));
  EXPECT_EQ(cache_.wars_residual(0, Branch::kCond)->step, 0);
}

TEST_F(SharingTest, ZeroResidualGivesWindowAttentionExactly) {
  const QKV qkv = oracle::random_qkv(rng_, 2, 12, 4);
  cache_.set_wars_residual(0, Branch::kCond, Tensor(cfg_.qkv_shape()), 0);
  EXPECT_TRUE(bitwise_equal(wars_reuse(qkv, cfg_, cache_, 0, Branch::kCond, 1),
                            window_attention(qkv, cfg_)));
}

TEST_F(SharingTest, ReuseWithoutResidualIsCacheMiss) {
  const QKV qkv = oracle::random_qkv(rng_, 2, 12, 4);
  EXPECT_THROW(wars_reuse(qkv, cfg_, cache_, 0, Branch::kCond, 1), CacheMissError);
  wars_refresh(qkv, cfg_, cache_, 0, Branch::kCond, 0);
  // Residuals are per branch.
  EXPECT_THROW(wars_reuse(qkv, cfg_, cache_, 0, Branch::kUncond, 1), CacheMissError);
  EXPECT_THROW(wars_reuse(qkv, cfg_, cache_, 0, Branch::kCond, 0), OrderingError);
}

TEST_F(SharingTest, ResidualSetSharesEarliestStep) {
  // Steps {2, 3, 4, 5} share the residual refreshed at step 2.
  const QKV qkv = oracle::random_qkv(rng_, 2, 12, 4);
  wars_refresh(qkv, cfg_, cache_, 0, Branch::kCond, 2);
  for (int k = 3; k <= 5; ++k) {
    const QKV step_qkv = oracle::random_qkv(rng_, 2, 12, 4);
    wars_reuse(step_qkv, cfg_, cache_, 0, Branch::kCond, k);
    EXPECT_EQ(cache_.wars_residual(0, Branch::kCond)->step, 2);
  }
}

TEST_F(SharingTest, AstRoundTripIsBitwise) {
  const Tensor x = rng_.normal_tensor(cfg_.qkv_shape());
  ast_store(cache_, 1, Branch::kUncond, 0, x);
  const Tensor first = ast_reuse(cache_, 1, Branch::kUncond, 1);
  const Tensor second = ast_reuse(cache_, 1, Branch::kUncond, 2);
  EXPECT_TRUE(bitwise_equal(first, x));
  EXPECT_TRUE(bitwise_equal(second, x));
}

TEST_F(SharingTest, AstReuseBeforeStoreIsCacheMiss) {
  EXPECT_THROW(ast_reuse(cache_, 0, Branch::kCond, 1), CacheMissError);
  ast_store(cache_, 0, Branch::kCond, 0, Tensor({1}));
  EXPECT_THROW(ast_reuse(cache_, 0, Branch::kUncond, 1), CacheMissError);
}

TEST_F(SharingTest, AscRoundTripWithinStep) {
  const Tensor x = rng_.normal_tensor(cfg_.qkv_shape());
  asc_store(cache_, 2, 4, x);
  EXPECT_TRUE(bitwise_equal(asc_reuse(cache_, 2, 4), x));
}

TEST_F(SharingTest, AscIsScopedToOneStep) {
  const Tensor x = rng_.normal_tensor(cfg_.qkv_shape());
  EXPECT_THROW(asc_reuse(cache_, 0, 0), OrderingError);
  asc_store(cache_, 0, 5, x);
  EXPECT_THROW(asc_reuse(cache_, 0, 6), OrderingError);
  cache_.end_step(5);
  EXPECT_FALSE(cache_.cond_output(0));
  EXPECT_THROW(asc_reuse(cache_, 0, 5), OrderingError);
}

TEST_F(SharingTest, CacheCopiesAreIndependent) {
  asc_store(cache_, 0, 0, Tensor({2}, 1.0f));
  CacheState copy = cache_;
  copy.set_ast_output(0, Branch::kCond, Tensor({2}, 3.0f), 0);
  EXPECT_FALSE(cache_.ast_output(0, Branch::kCond));
  EXPECT_TRUE(copy.cond_output(0));
}

TEST(StrategyTest, TokensRoundTrip) {
  for (Strategy s : {Strategy::kFull, Strategy::kAst, Strategy::kWars,
                     Strategy::kAsc, Strategy::kWarsAsc}) {
    EXPECT_EQ(parse_strategy(strategy_token(s)), s);
  }
  EXPECT_THROW(parse_strategy("window"), PlanError);
  try {
    parse_strategy("bogus");
  } catch (const PlanError& e) {
    EXPECT_NE(std::string(e.what()).find("bogus"), std::string::npos);
  }
}

TEST(StrategyTest, DefaultSearchOrder) {
  EXPECT_EQ(kDefaultStrategyOrder[0], Strategy::kAst);
  EXPECT_EQ(kDefaultStrategyOrder[1], Strategy::kWarsAsc);
  EXPECT_EQ(kDefaultStrategyOrder[2], Strategy::kWars);
  EXPECT_EQ(kDefaultStrategyOrder[3], Strategy::kAsc);
}

}  // namespace
}  // namespace attnshare
