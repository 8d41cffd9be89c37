#include "memsim/io.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

using namespace memsim;

TEST_CASE("waveform CSV round-trips bit-exact") {
    Waveform w;
    w.dt = 1e-6 / 3.0;
    w.names = {"V(out)", "V(in,n1)", "I(M1)", "odd \"name\""};
    w.channels.assign(4, {});
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1e3, 1e3);
    for (int k = 0; k < 100; ++k) {
        w.t.push_back(k * w.dt);
        for (auto& ch : w.channels) ch.push_back(u(rng) * std::pow(10.0, k % 40 - 20));
    }
    w.channels[0][3] = std::numeric_limits<double>::denorm_min();
    w.channels[1][4] = -0.0;

    std::stringstream buf;
    write_waveform_csv(buf, w);
    const std::string text = buf.str();
    CHECK(text.rfind("t,V(out),\"V(in,n1)\",I(M1),\"odd \"\"name\"\"\"\n", 0) == 0);

    const Waveform back = read_waveform_csv(buf);
    CHECK(back.names == w.names);
    CHECK(back.t == w.t);
    CHECK(back.channels == w.channels);
    CHECK(back.dt == w.t[1] - w.t[0]);
}

TEST_CASE("spectrum CSV header") {
    Spectrum s;
    s.freq = {0.0, 100.0};
    s.magnitude = {1.0, 0.5};
    s.phase = {0.0, -1.25};
    std::ostringstream out;
    write_spectrum_csv(out, s);
    CHECK(out.str() == "freq_hz,magnitude,phase_rad\n0,1,0\n100,0.5,-1.25\n");
}

TEST_CASE("malformed CSV is rejected") {
    for (const char* bad : {"", "x,V(a)\n0,1\n", "t,V(a)\n0,1,2\n", "t,V(a)\n0,abc\n", "t,\"V(a)\n0,1\n"}) {
        INFO(bad);
        std::istringstream in(bad);
        CHECK_THROWS_AS(read_waveform_csv(in), IoError);
    }
}

TEST_CASE("missing files") {
    CHECK_THROWS_AS(load_waveform_csv("/nonexistent/dir/w.csv"), IoError);
    CHECK_THROWS_AS(save_text("/nonexistent/dir/w.csv", "x"), IoError);
}
