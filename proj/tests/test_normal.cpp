#include <gtest/gtest.h>

#include <cmath>

#include "grabit/normal.hpp"
#include "test_util.hpp"

namespace grabit {
namespace {

using testing::rel_close;

// Reference values from 50-digit arithmetic.
struct TailCase {
  double z;
  double log_sf;
  double upper_hazard;
  double hessian_factor;  // lambda * (lambda - z)
};

constexpr TailCase kTail[] = {
    {3.0, -6.6077262215103495433, 3.2830986549304365069, 0.92944081321473188314},
    {8.5, -39.197396428217669289, 8.6145953201651728741, 0.98719230880772790686},
    {12.0, -75.410673001568795939, 12.08221417525428433, 0.99332927366415413567},
    {20.0, -203.91715537109726394, 20.049753068527850542, 0.9975367383849478364},
    {40.0, -804.60844201375378817, 40.024968847207263723, 0.99937733162140861123},
};

TEST(Normal, CdfMatchesReference) {
  EXPECT_TRUE(rel_close(normal::cdf(-1.0), 0.15865525393145705141, 1e-15));
  EXPECT_TRUE(rel_close(normal::sf(1.6449), 0.049995217468346302713, 1e-14));
  EXPECT_DOUBLE_EQ(normal::cdf(0.0), 0.5);
  EXPECT_DOUBLE_EQ(normal::pdf(0.0), 1.0 / std::sqrt(2.0 * M_PI));
}

TEST(Normal, UpperTailInLogSpace) {
  for (const auto& c : kTail) {
    SCOPED_TRACE(c.z);
    EXPECT_TRUE(rel_close(normal::log_sf(c.z), c.log_sf, 1e-13));
    EXPECT_TRUE(rel_close(normal::upper_hazard(c.z), c.upper_hazard, 1e-13));
    const double lam = normal::upper_hazard(c.z);
    EXPECT_TRUE(rel_close(lam * normal::upper_hazard_minus_z(c.z), c.hessian_factor, 1e-12));
  }
  EXPECT_TRUE(rel_close(-normal::log_sf(10.0), 53.231285150512470578, 1e-14));
}

TEST(Normal, LowerTailMirrorsUpper) {
  EXPECT_TRUE(rel_close(normal::lower_hazard(3.0), 0.0044378390421256637933, 1e-12));
  EXPECT_TRUE(rel_close(normal::lower_hazard(8.5), 8.1662356316695501168e-17, 1e-12));
  EXPECT_TRUE(rel_close(normal::lower_hazard(12.0), 2.146383735663060345e-32, 1e-12));
  for (const auto& c : kTail) EXPECT_EQ(normal::lower_hazard(-c.z), normal::upper_hazard(c.z));
  for (const auto& c : kTail) EXPECT_TRUE(rel_close(normal::log_cdf(-c.z), c.log_sf, 1e-13));
  EXPECT_TRUE(rel_close(normal::log_cdf(3.0), -0.0013508099647481937988, 1e-13));
  EXPECT_TRUE(rel_close(normal::log_cdf(12.0), -1.7764821120776789977e-33, 1e-12));
}

TEST(Normal, ContinuousAcrossTailSwitch) {
  const double below = std::nextafter(normal::kTailSwitch, 0.0);
  const double above = std::nextafter(normal::kTailSwitch, 100.0);
  EXPECT_TRUE(rel_close(normal::log_sf(below), normal::log_sf(above), 1e-13));
  EXPECT_TRUE(rel_close(normal::upper_hazard(below), normal::upper_hazard(above), 1e-13));
  EXPECT_TRUE(rel_close(normal::upper_hazard_minus_z(below), normal::upper_hazard_minus_z(above), 1e-11));
}

TEST(Normal, HazardFiniteFarOut) {
  for (double z : {50.0, 1e3, 1e6}) {
    EXPECT_TRUE(std::isfinite(normal::upper_hazard(z)));
    EXPECT_GT(normal::upper_hazard_minus_z(z), 0.0);
    EXPECT_TRUE(std::isfinite(normal::log_sf(z)));
  }
  EXPECT_GT(normal::lower_hazard(-50.0), 0.0);
}

}  // namespace
}  // namespace grabit
