#include <doctest.h>

#include <sstream>

#include "helpers.hpp"
#include "lfl/comm_ledger.hpp"

using namespace lfl;

TEST_CASE("params_bytes is 4 per alive position") {
  const ModelArch arch{{784, 300, 100, 10}};
  Mask m = full_mask(arch);
  CHECK(params_bytes(m) == 1066440);  // 266,610 x 4
  CHECK(full_params_bytes(arch) == 1066440);

  for (auto& w : m.weights) w.setZero();
  CHECK(params_bytes(m) == 1640);  // 410 biases x 4

  std::mt19937 g(3);
  Mask some = lfl::test::random_mask(ModelArch{{30, 20}}, 0.5, g);
  CHECK(params_bytes(some) == static_cast<std::uint64_t>(some.alive_count()) * 4);
}

TEST_CASE("mask_bytes is the per-array padded bitmap sum") {
  CHECK(mask_bytes(full_mask(ModelArch{{17, 1}})) == 3 + 1);  // ceil(17/8) + ceil(1/8)
  const ModelArch mnist{{784, 300, 100, 10}};
  // 29400 + 38 + 3750 + 13 + 125 + 2
  CHECK(mask_bytes(full_mask(mnist)) == 33328);
  CHECK(mask_bytes(full_mask(mnist)) == mask_bitmap_bytes(mnist));
}

TEST_CASE("wire serializers produce exactly the accounted bytes") {
  const ModelArch arch{{23, 11, 4}};
  std::mt19937 g(9);
  for (int trial = 0; trial < 20; ++trial) {
    const Mask m = lfl::test::random_mask(arch, 0.6, g);
    const auto p = apply_mask(init_params<float>(arch, trial), m);
    CHECK(serialize_alive_values(p, m).size() == params_bytes(m));
    CHECK(mask_to_bitmap(m).size() == mask_bytes(m));
  }
}

TEST_CASE("lg payload counts only the global layers") {
  const ModelArch arch{{784, 300, 100, 10}};
  CHECK(lg_global_params_bytes(arch, 0) == full_params_bytes(arch));
  CHECK(lg_global_params_bytes(arch, 2) == (100 * 10 + 10) * 4);
  CHECK(lg_global_params_bytes(arch, 1) == (300 * 100 + 100 + 100 * 10 + 10) * 4);
}

TEST_CASE("fedavg round cost is 2 x full params per selected client") {
  const ModelArch arch{{784, 300, 100, 10}};
  CommLedger ledger;
  for (int c = 0; c < 5; ++c) {
    ledger.add(0, c, Direction::Down, PayloadKind::Params, full_params_bytes(arch));
    ledger.add(0, c, Direction::Up, PayloadKind::Params, full_params_bytes(arch));
  }
  CHECK(ledger.total_bytes() == 10664400);
  CHECK(ledger.total_mb() == doctest::Approx(10.6644));
}

TEST_CASE("lotteryfl download cost tracks the remaining fraction within bias slack") {
  const ModelArch arch{{784, 300, 100, 10}};
  const auto p = init_params<float>(arch, 1);
  Mask m = full_mask(arch);
  while (remaining_weight_fraction(m) > 0.1) m = prune(p, m, 0.2);
  const double ratio = static_cast<double>(params_bytes(m)) / full_params_bytes(arch);
  const double bias_slack = 410.0 / 266610.0;
  CHECK(ratio > 0.1 * 0.8 - 1e-9);
  CHECK(ratio < 0.1 + bias_slack + 0.01);
}

TEST_CASE("ledger totals and csv output") {
  CommLedger ledger;
  ledger.add(0, 3, Direction::Down, PayloadKind::Params, 100);
  ledger.add(0, 3, Direction::Up, PayloadKind::Params, 80);
  ledger.add(1, 4, Direction::Up, PayloadKind::MaskBitmap, 7);
  CHECK(ledger.total_bytes() == 187);
  CHECK(ledger.bytes_for_round(0) == 180);
  CHECK(ledger.bytes_for_round(1) == 7);

  std::ostringstream os;
  ledger.write_csv(os);
  CHECK(os.str() ==
        "round,client_id,direction,kind,bytes\n"
        "0,3,down,params,100\n"
        "0,3,up,params,80\n"
        "1,4,up,mask,7\n");
}
