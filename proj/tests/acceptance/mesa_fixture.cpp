#include "acceptance/mesa_fixture.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <string>

#include "zinreg/error.hpp"

namespace zinreg::testing {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

int write_mesa_fixture(const std::filesystem::path& path, int n, std::uint64_t seed) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write fixture '" + path.string() + "'");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> n01(0.0, 1.0);
  std::discrete_distribution<int> race_d({0.38, 0.12, 0.28, 0.22});
  std::discrete_distribution<int> smoke_d({0.5, 0.37, 0.13});

  out << "cac,gender,race,dm,smoking,age,bmi,dbp,sbp,hdl,ldl\n";
  int missing = 0;
  for (int i = 0; i < n; ++i) {
    const int male = unif(rng) < 0.47 ? 1 : 0;
    const int race = race_d(rng);
    const int dm = unif(rng) < 0.13 ? 1 : 0;
    const int smoke = smoke_d(rng);
    const double age = 44.0 + 40.0 * unif(rng);
    const double bmi = 28.0 + 5.0 * n01(rng);
    const double dbp = 72.0 + 10.0 * n01(rng);
    const double sbp = 126.0 + 0.5 * (age - 64.0) + 20.0 * n01(rng);
    const double hdl = 51.0 - 8.0 * male + 14.0 * n01(rng);
    const double ldl = 117.0 + 30.0 * n01(rng);

    const double t = (age - 64.0) / 20.0;
    const double s_age = 0.6 * t + 0.25 * t * t - 0.25 / 3.0;
    const double s_sbp = 0.25 * std::tanh((sbp - 126.0) / 25.0);
    const double eta = -0.1 + 0.9 * male - 0.3 * (race == 1) - 0.5 * (race == 2) - 0.2 * (race == 3) +
                       0.2 * (smoke == 1) + 0.4 * (smoke == 2) + 0.5 * dm + 0.03 * (bmi - 28.0) +
                       2.0 * s_age + 0.012 * (sbp - 126.0) - 0.015 * (hdl - 50.0) +
                       0.4 * std::sin((ldl - 117.0) / 40.0);
    const double mu = 3.2 + 0.3 * male - 0.2 * (race == 2) + 0.15 * (smoke == 2) + 0.2 * dm +
                      0.01 * (bmi - 28.0) + s_age + s_sbp - 0.004 * (hdl - 50.0) +
                      0.002 * (ldl - 117.0);
    const double p = 1.0 / (1.0 + std::exp(-eta));
    double ystar = mu + 1.1 * n01(rng);
    if (ystar < 0.05) ystar = 0.05;
    const double cac = unif(rng) < p ? std::expm1(ystar) : 0.0;

    std::string f_bmi = num(bmi);
    std::string f_sbp = num(sbp);
    std::string f_ldl = num(ldl);
    if (unif(rng) < 0.02) {
      ++missing;
      const double which = unif(rng);
      (which < 0.4 ? f_bmi : which < 0.7 ? f_sbp : f_ldl) = "NA";
    }
    out << num(cac) << ',' << male << ',' << race << ',' << dm << ',' << smoke << ',' << num(age)
        << ',' << f_bmi << ',' << num(dbp) << ',' << f_sbp << ',' << num(hdl) << ',' << f_ldl << '\n';
  }
  return missing;
}

}  // namespace zinreg::testing
