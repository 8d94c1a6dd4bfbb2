#include "doctest.h"

#include <sstream>

#include "../tools/cli.hpp"

using breuilkit::cli::run;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run cli(std::initializer_list<std::string> args) {
    std::ostringstream o, e;
    int code = run(std::vector<std::string>(args), o, e);
    return {code, o.str(), e.str()};
}

} // namespace

TEST_CASE("rank1 list counts and determinism") {
    auto r3 = cli({"rank1", "--l", "3", "--list"});
    REQUIRE(r3.code == 0);
    auto doc = nlohmann::json::parse(r3.out);
    CHECK(doc["result"]["count"] == 20);
    auto again = cli({"rank1", "--l", "3", "--list"});
    CHECK(again.out == r3.out); // byte-stable

    auto r5 = cli({"rank1", "--l", "5", "--list"});
    REQUIRE(r5.code == 0);
    CHECK(nlohmann::json::parse(r5.out)["result"]["count"] == 112);
}

TEST_CASE("rank1 single character and usage errors") {
    auto r = cli({"rank1", "--l", "3", "--char", "0", "1", "1"});
    REQUIRE(r.code == 0);
    auto doc = nlohmann::json::parse(r.out);
    CHECK(doc["result"]["character"]["unit"] == 1);
    CHECK(doc["result"]["character"]["cyclo_exp"] == 0);

    CHECK(cli({"rank1", "--l", "4", "--list"}).code == 2);
    CHECK(cli({"rank1", "--l", "3"}).code == 2);
    CHECK(cli({"rank1", "--l", "3", "--list", "--char", "0", "1", "1"}).code == 2);
    CHECK(cli({"bogus"}).code == 2);
}

TEST_CASE("rank1 list as csv") {
    auto r = cli({"rank1", "--l", "3", "--list", "--format", "csv"});
    REQUIRE(r.code == 0);
    CHECK(r.out.substr(0, 5) == "r,a,c");
    size_t lines = std::count(r.out.begin(), r.out.end(), '\n');
    CHECK(lines == 21); // header + 20 classes
    // csv is not available for non-list commands
    CHECK(cli({"rank1", "--l", "3", "--char", "0", "1", "1", "--format", "csv"}).code == 2);
}

TEST_CASE("lattice command") {
    auto r = cli({"lattice", "--l", "3", "--k", "1", "--a", "1", "--b", "2", "--c", "0", "--d", "1"});
    REQUIRE(r.code == 0);
    auto doc = nlohmann::json::parse(r.out);
    CHECK(doc["result"]["count"] == 9);
    CHECK(doc["result"]["maximal"]["r"] == 4);
    CHECK(doc["result"]["maximal"]["s"] == 8);
    CHECK(doc["result"]["maximal"]["n"] == 6);
    CHECK(doc["result"]["minimal"]["r"] == 0);
    CHECK(doc["result"]["minimal"]["s"] == 4);
    CHECK(doc["result"]["minimal"]["n"] == 2);

    auto k0 = cli({"lattice", "--l", "3", "--k", "0", "--a", "1", "--b", "2", "--c", "1", "--d", "1"});
    REQUIRE(k0.code == 0);
    CHECK(nlohmann::json::parse(k0.out)["result"]["count"] == 3);

    auto kl = cli({"lattice", "--l", "3", "--k", "3", "--a", "1", "--b", "2", "--c", "0", "--d", "1"});
    REQUIRE(kl.code == 0);
    CHECK(nlohmann::json::parse(kl.out)["result"]["count"] == 1);

    CHECK(cli({"lattice", "--l", "3", "--k", "5", "--a", "1", "--b", "2", "--c", "0", "--d", "1"}).code == 2);
    // k not congruent to d - c: domain error
    CHECK(cli({"lattice", "--l", "3", "--k", "1", "--a", "1", "--b", "2", "--c", "0", "--d", "0"}).code == 3);
}

TEST_CASE("lattice plot output") {
    auto r = cli({"lattice", "--l", "3", "--k", "1", "--a", "1", "--b", "2", "--c", "0", "--d", "1",
                  "--plot"});
    REQUIRE(r.code == 0);
    auto doc = nlohmann::json::parse(r.out);
    REQUIRE(doc["result"].contains("plot"));
    std::string svg = doc["result"]["plot"]["svg"];
    CHECK(svg.find("<svg") == 0);
    CHECK(svg.find("circle") != std::string::npos);
    int hashes = 0;
    for (const auto& row : doc["result"]["plot"]["ascii"]) {
        std::string s = row;
        hashes += static_cast<int>(std::count(s.begin(), s.end(), '#'));
    }
    CHECK(hashes == 9);
}

TEST_CASE("admissible command") {
    auto r = cli({"admissible", "--l", "3", "--m", "1", "--brute"});
    REQUIRE(r.code == 0);
    auto doc = nlohmann::json::parse(r.out);
    CHECK(doc["result"]["count"] == 2);
    CHECK(doc["result"]["forms_match_target"] == true);
    CHECK(doc["result"]["brute_checked"] == true);
    CHECK(doc["result"]["inertia_forms"].size() == 1);

    auto r2 = cli({"admissible", "--l", "3", "--m", "2"});
    REQUIRE(r2.code == 0);
    auto d2 = nlohmann::json::parse(r2.out);
    CHECK(d2["result"]["inertia_forms"].size() == 2);
    for (const auto& f : d2["result"]["inertia_forms"]) CHECK(f["peu_ramifie"] == true);

    CHECK(cli({"admissible", "--l", "3", "--m", "4"}).code == 3);
}

TEST_CASE("ext4 command") {
    auto r = cli({"ext4", "--l", "3", "--i", "1", "--j", "0", "--a", "1", "--b", "2"});
    REQUIRE(r.code == 0);
    auto doc = nlohmann::json::parse(r.out);
    CHECK(doc["result"]["normal_form_dim"] == 2);
    CHECK(doc["result"]["constrained_dim"] == 1);

    auto ro = cli({"ext4", "--l", "3", "--i", "1", "--j", "0", "--a", "1", "--b", "2", "--oracle"});
    REQUIRE(ro.code == 0);
    CHECK(nlohmann::json::parse(ro.out)["result"]["oracle_dim"] == 2);

    CHECK(cli({"ext4", "--l", "3", "--i", "1", "--j", "0", "--a", "1", "--b", "1"}).code == 3);
}

TEST_CASE("cohom command and guard refusal") {
    auto r = cli({"cohom", "--l", "3", "--e", "2", "--f", "1", "--n", "2"});
    REQUIRE(r.code == 0);
    auto doc = nlohmann::json::parse(r.out);
    CHECK(doc["result"]["h1_additive"] == 1);
    CHECK(doc["result"]["h1_multiplicative"] == 2);
    CHECK(doc["result"]["class_representatives"].size() == 2);

    CHECK(cli({"cohom", "--l", "5", "--e", "4", "--f", "2", "--n", "4"}).code == 4);
}

TEST_CASE("out file writing") {
    std::string path = "/tmp/breuilkit_cli_test.json";
    auto r = cli({"rank1", "--l", "3", "--char", "2", "2", "1", "--out", path});
    REQUIRE(r.code == 0);
    CHECK(r.out.empty());
    std::ifstream f(path);
    REQUIRE(f.good());
    nlohmann::json doc;
    f >> doc;
    CHECK(doc["result"]["a"] == 2);
}
