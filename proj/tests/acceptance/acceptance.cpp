#include <iostream>
#include "airfl/fl_sim.hpp"
#include "airfl/optimizer.hpp"
#include "airfl/verify.hpp"
#include "airfl/io.hpp"
int main() { std::cout << "placeholder\n"; return 0; }
