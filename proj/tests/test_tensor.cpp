// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "pilotlink/rng.hpp"
#include "pilotlink/tensor.hpp"

using namespace pl;

TEST_CASE("tensor shape and indexing") {
    Tensor t({2, 3, 4});
    CHECK(t.size() == 24);
    CHECK(t.rank() == 3);
    t.at(1, 2, 3) = 7.0;
    CHECK(t[23] == 7.0);
    CHECK_THROWS(Tensor({2}, {1.0, 2.0, 3.0}));
}

TEST_CASE("scalar tensor") {
    Tensor s = Tensor::scalar(2.5);
    CHECK(s.size() == 1);
    CHECK(s.item() == 2.5);
    Tensor t({2});
    CHECK_THROWS(t.item());
}

TEST_CASE("counter rng is order independent") {
    using namespace pl::rng;
    const auto a = derive(42, {label("x"), 3, 7});
    const auto b = derive(42, {label("x"), 3, 7});
    const auto c = derive(42, {label("x"), 7, 3});
    CHECK(a == b);
    CHECK(a != c);
    CHECK(derive(42, {label("x")}) != derive(43, {label("x")}));
    CHECK(derive(42, {label("x")}) != derive(42, {label("y")}));
}

TEST_CASE("rng normals have sane moments") {
    rng::Stream st(rng::derive(7, {rng::label("moments")}));
    double s1 = 0.0, s2 = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double x = st.next_normal();
        s1 += x;
        s2 += x * x;
    }
    CHECK(s1 / n == doctest::Approx(0.0).epsilon(0.02));
    CHECK(s2 / n == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("rng complex normal variance splits between parts") {
    rng::Stream st(rng::derive(9, {rng::label("cn")}));
    double er = 0.0, ei = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const auto z = st.next_cnormal(4.0);
        er += z.real() * z.real();
        ei += z.imag() * z.imag();
    }
    CHECK(er / n == doctest::Approx(2.0).epsilon(0.05));
    CHECK(ei / n == doctest::Approx(2.0).epsilon(0.05));
}
