#include "helpers.hpp"

#include <gtest/gtest.h>

using namespace topamp;
using io::json;

TEST(Format, ShortestRoundTrip) {
    for (double x : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 3.86601746156953e-07}) {
        EXPECT_EQ(std::stod(io::format_double(x)), x);
    }
    EXPECT_EQ(io::format_double(0.5), "0.5");
    EXPECT_EQ(io::format_double(-std::numeric_limits<double>::infinity()), "-inf");
}

TEST(Digest, KnownVectors) {
    EXPECT_EQ(io::bytes_digest(""), "cbf29ce484222325");
    EXPECT_EQ(io::bytes_digest("a"), "af63dc4c8601ec8c");
    EXPECT_EQ(io::bytes_digest("foobar"), "85944171f73967e8");
}

TEST(Digest, ModelRoundTrip) {
    const LatticeModel m = build_chain({1.0, 0.5, 0.3, pi / 3, 7});
    const json doc = io::model_to_json(m);
    const LatticeModel back = io::model_from_json(json::parse(doc.dump()));
    EXPECT_EQ(io::model_digest(back), doc["digest"].get<std::string>());
    EXPECT_EQ(coupling_matrix(back).h, coupling_matrix(m).h);
    EXPECT_NE(io::model_digest(build_chain({1.0, 0.5, 0.3, pi / 3, 8})), io::model_digest(m));
}

TEST(Json, ChainDocument) {
    const json doc = json::parse(R"({"chain": {"t_c": 1, "t_d": 1, "gamma_p": 1, "phi": 1.0471975511965976, "n": 5},
                                    "drive": {"site": 5, "amplitude": [0, 2]}})");
    const LatticeModel m = io::model_from_json(doc);
    EXPECT_EQ(m.n_sites(), 5);
    const Drive d = io::drive_from_json(doc, 5);
    EXPECT_EQ(d.epsilon(4), cplx(0, 2));
    EXPECT_EQ(io::drive_from_json(json::object(), 5).epsilon(0), cplx(1.0));
    EXPECT_EQ(io::chain_from_json(io::chain_to_json({2, 3, 4, 0.5, 6})).t_d, 3.0);
}

TEST(Json, RejectsMalformed) {
    EXPECT_THROW(io::model_from_json(json::parse(R"({"chain": {"n": 5, "tc": 1}})")), ModelError);
    EXPECT_THROW(io::model_from_json(json::parse(R"({"chain": {"n": 5}, "custom": {}})")), ModelError);
    EXPECT_THROW(io::model_from_json(json::parse(R"({})")), ModelError);
    EXPECT_THROW(io::model_from_json(json::parse(R"({"chain": {"n": "five"}})")), ModelError);
    EXPECT_THROW(io::model_from_json(json::parse(R"({"chain": {"n": 5, "boundary": "twisted"}})")), ModelError);
    EXPECT_THROW(io::complex_from_json(json::parse("[1, 2, 3]")), ModelError);
    EXPECT_THROW(io::drive_from_json(json::parse(R"({"drive": {"site": 0}})"), 5), ModelError);
    EXPECT_THROW(io::drive_from_json(json::parse(R"({"drive": {"epsilon": [1, 2]}})"), 5), ModelError);
    EXPECT_THROW(io::read_json_file("/nonexistent/config.json"), ModelError);
}

TEST(Json, DisorderBlock) {
    const json doc = json::parse(R"({"chain": {"n": 6, "gamma_p": 1}, "disorder": {"sigma": 0.2, "seed": 5}})");
    const LatticeModel a = io::model_from_json(doc), b = io::model_from_json(doc);
    EXPECT_EQ(io::model_digest(a), io::model_digest(b));
    EXPECT_NE(io::model_digest(a), io::model_digest(build_chain({1, 1, 1, 0, 6})));
}

TEST(Csv, QuotingAndLineEnds) {
    io::CsvTable t({"name", "value", "count"});
    t.row({std::string("a,b"), 0.25, 3LL});
    t.row({std::string("say \"hi\""), -1e-20, -4LL});
    EXPECT_EQ(t.str(), "name,value,count\r\n\"a,b\",0.25,3\r\n\"say \"\"hi\"\"\",-1e-20,-4\r\n");
    EXPECT_THROW(t.row({1.0}), std::logic_error);
}
