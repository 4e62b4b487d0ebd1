#include <catch2/catch_amalgamated.hpp>

#include "airfl/fl_sim.hpp"
#include "airfl/optimizer.hpp"
#include "airfl/verify.hpp"
#include "airfl/io.hpp"

TEST_CASE("placeholder_scenario") { REQUIRE(true); }
