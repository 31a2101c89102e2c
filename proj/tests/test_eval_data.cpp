#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <atomic>
#include <thread>

#include "doctest.h"
#include "frugal/eval_data.hpp"
#include "frugal/rng.hpp"
#include "httplib.h"
#include "support/test_util.hpp"

using namespace frugal;

namespace {

EvalMatrix matrix_of(const std::string& csv) {
    return build_matrix(parse_eval_csv(std::string_view(csv))).matrix;
}

}  // namespace

TEST_CASE("parse_eval_csv maps fields") {
    const auto records = parse_eval_csv(std::string_view(
        "algorithm_id,dataset_id,auc,train_ms,test_ms\nrf,ds1,0.91,120,3\n"));
    REQUIRE(records.size() == 1);
    CHECK(records[0].algorithm_id == "rf");
    CHECK(records[0].dataset_id == "ds1");
    CHECK(records[0].auc == 0.91);
    CHECK(records[0].train_ms == 120.0);
    CHECK(records[0].test_ms == 3.0);
}

TEST_CASE("parse_eval_csv trims whitespace and accepts CRLF") {
    const auto records = parse_eval_csv(std::string_view(
        "algorithm_id,dataset_id,auc,train_ms,test_ms\r\n rf , ds1 , 0.5 , 1 , 2 \r\n"));
    REQUIRE(records.size() == 1);
    CHECK(records[0].algorithm_id == "rf");
    CHECK(records[0].auc == 0.5);
}

TEST_CASE("parse_eval_csv errors name the line") {
    const std::string header = "algorithm_id,dataset_id,auc,train_ms,test_ms\n";
    CHECK_THROWS_WITH_AS(parse_eval_csv(std::string_view(header + "rf,ds1,1.2,120,3\n")),
                         "auc out of range, line 2", Error);
    CHECK_THROWS_WITH_AS(parse_eval_csv(std::string_view(header + "rf,ds1,0.5,120\n")),
                         "wrong column count, line 2", Error);
    CHECK_THROWS_WITH_AS(parse_eval_csv(std::string_view(header + "rf,ds1,0.5,-1,3\n")),
                         "negative time, line 2", Error);
    CHECK_THROWS_WITH_AS(parse_eval_csv(std::string_view(header + "rf,ds1,x,1,3\n")),
                         "non-numeric auc, line 2", Error);
    CHECK_THROWS_AS(parse_eval_csv(std::string_view("bogus,bad\n")), Error);
}

TEST_CASE("parse_eval_csv vacuous inputs") {
    CHECK(parse_eval_csv(std::string_view("")).empty());
    CHECK(parse_eval_csv(std::string_view("algorithm_id,dataset_id,auc,train_ms,test_ms\n"))
              .empty());
}

TEST_CASE("build_matrix places records and sorts axes") {
    const auto result = build_matrix(parse_eval_csv(std::string_view(
        "algorithm_id,dataset_id,auc,train_ms,test_ms\n"
        "b,ds1,0.5,1,1\n"
        "a,ds2,0.7,2,2\n")));
    const EvalMatrix& m = result.matrix;
    CHECK(m.algorithms == std::vector<std::string>{"a", "b"});
    CHECK(m.datasets == std::vector<std::string>{"ds1", "ds2"});
    CHECK(m.num_missing() == 2);
    CHECK(m.mask(0, 1));
    CHECK(m.auc(0, 1) == 0.5);
    CHECK(m.auc(1, 0) == 0.7);
    CHECK(result.duplicates.empty());
}

TEST_CASE("build_matrix averages duplicates and reports them") {
    const auto result = build_matrix(parse_eval_csv(std::string_view(
        "algorithm_id,dataset_id,auc,train_ms,test_ms\n"
        "a,ds1,0.8,10,1\n"
        "a,ds1,0.9,20,3\n")));
    CHECK(result.matrix.auc(0, 0) == doctest::Approx(0.85).epsilon(1e-12));
    CHECK(result.matrix.train_ms(0, 0) == doctest::Approx(15.0));
    REQUIRE(result.duplicates.size() == 1);
    CHECK(result.duplicates[0].count == 2);
}

TEST_CASE("build_matrix of nothing") {
    const auto result = build_matrix({});
    CHECK(result.matrix.rows() == 0);
    CHECK(result.matrix.cols() == 0);
}

TEST_CASE("matrix round-trips through records for duplicate-free input") {
    const std::string csv =
        "algorithm_id,dataset_id,auc,train_ms,test_ms\n"
        "a,ds1,0.8125,10.5,1.25\n"
        "b,ds1,0.25,3,0\n"
        "a,ds2,0.5,7,2\n";
    const EvalMatrix m = matrix_of(csv);
    const EvalMatrix again = build_matrix(matrix_to_records(m)).matrix;
    CHECK(again.auc == m.auc);
    CHECK(again.train_ms == m.train_ms);
    CHECK(again.test_ms == m.test_ms);
    CHECK(again.algorithms == m.algorithms);
}

TEST_CASE("matrix json round-trip") {
    test_util::TempDir dir("frugal_matrix");
    const EvalMatrix m = matrix_of(
        "algorithm_id,dataset_id,auc,train_ms,test_ms\n"
        "a,ds1,0.8125,10.5,1.25\n"
        "a,ds2,0.5,7,2\n");
    save_matrix(m, dir.file("m.json"));
    const EvalMatrix back = load_matrix(dir.file("m.json"));
    CHECK(back.auc == m.auc);
    CHECK(back.mask(0, 0) == m.mask(0, 0));
    CHECK(back.datasets == m.datasets);
}

TEST_CASE("prune_algorithms removes columns over the threshold") {
    // 12 datasets; algorithm `gappy` observed once (11 missing), `edge`
    // missing exactly 10, `full` complete
    std::string csv = "algorithm_id,dataset_id,auc,train_ms,test_ms\n";
    for (int d = 0; d < 12; ++d) {
        csv += "full,ds" + std::to_string(10 + d) + ",0.5,1,1\n";
        if (d < 2) csv += "edge,ds" + std::to_string(10 + d) + ",0.5,1,1\n";
        if (d < 1) csv += "gappy,ds" + std::to_string(10 + d) + ",0.5,1,1\n";
    }
    const EvalMatrix m = matrix_of(csv);
    const PruneResult pruned = prune_algorithms(m, 10);
    CHECK(pruned.matrix.algorithms == std::vector<std::string>{"edge", "full"});
    REQUIRE(pruned.removed.size() == 1);
    CHECK(pruned.removed[0].algorithm_id == "gappy");
    CHECK(pruned.removed[0].missing_count == 11);

    SUBCASE("idempotent") {
        const PruneResult again = prune_algorithms(pruned.matrix, 10);
        CHECK(again.matrix.algorithms == pruned.matrix.algorithms);
        CHECK(again.removed.empty());
    }
    SUBCASE("report csv is sorted by count") {
        const PruneResult all = prune_algorithms(m, 0);
        CHECK(prune_report_csv(all.removed) ==
              "algorithm_id,missing_count\ngappy,11\nedge,10\n");
    }
}

TEST_CASE("prune of a fully observed matrix is the identity") {
    const EvalMatrix m = matrix_of(
        "algorithm_id,dataset_id,auc,train_ms,test_ms\n"
        "a,ds1,0.8,1,1\nb,ds1,0.7,1,1\n");
    const PruneResult pruned = prune_algorithms(m, 10);
    CHECK(pruned.removed.empty());
    CHECK(pruned.matrix.algorithms == m.algorithms);
    CHECK(pruned.matrix.auc == m.auc);
}

TEST_CASE("imputation returns a fully observed matrix bit-identical") {
    Eigen::MatrixXd values(2, 2);
    values << 1.0, 2.0, 3.0, 4.0;
    const BoolMatrix mask = BoolMatrix::Constant(2, 2, true);
    const Eigen::MatrixXd out = impute_iterative_svd(values, mask, {1, 1e-6, 100});
    CHECK(out == values);
}

TEST_CASE("imputation recovers a rank-1 matrix from 10% masking") {
    Rng rng(7);
    const int n_rows = 20, n_cols = 8;
    Eigen::VectorXd u(n_rows), v(n_cols);
    for (int i = 0; i < n_rows; ++i) u(i) = 0.5 + rng.uniform();
    for (int j = 0; j < n_cols; ++j) v(j) = 0.5 + rng.uniform();
    const Eigen::MatrixXd truth = u * v.transpose();

    BoolMatrix mask = BoolMatrix::Constant(n_rows, n_cols, true);
    int masked = 0;
    while (masked < n_rows * n_cols / 10) {
        const auto r = static_cast<Eigen::Index>(rng.index(n_rows));
        const auto c = static_cast<Eigen::Index>(rng.index(n_cols));
        if (!mask(r, c)) continue;
        mask(r, c) = false;
        if (!mask.row(r).any() || !mask.col(c).any()) {
            mask(r, c) = true;  // keep every row/column observed
            continue;
        }
        ++masked;
    }

    Eigen::MatrixXd values = truth;
    for (Eigen::Index r = 0; r < n_rows; ++r)
        for (Eigen::Index c = 0; c < n_cols; ++c)
            if (!mask(r, c)) values(r, c) = 0.0;

    const Eigen::MatrixXd out = impute_iterative_svd(values, mask, {1, 1e-12, 500});
    for (Eigen::Index r = 0; r < n_rows; ++r)
        for (Eigen::Index c = 0; c < n_cols; ++c) {
            if (mask(r, c))
                CHECK(out(r, c) == values(r, c));  // observed cells untouched
            else
                CHECK(std::abs(out(r, c) - truth(r, c)) < 1e-6);
        }
}

TEST_CASE("imputation names an all-missing column") {
    std::string csv = "algorithm_id,dataset_id,auc,train_ms,test_ms\n";
    csv += "a,ds1,0.8,1,1\na,ds2,0.6,1,1\nb,ds1,0.7,1,1\n";
    EvalMatrix m = matrix_of(csv);
    m.mask(0, 1) = false;  // algorithm b now entirely unobserved
    CHECK_THROWS_WITH_AS(impute_matrix(m, {1, 1e-6, 100}),
                         "cannot impute: 'b' has no observed cells", Error);
}

TEST_CASE("imputation rejects a bad rank") {
    const EvalMatrix m = matrix_of(
        "algorithm_id,dataset_id,auc,train_ms,test_ms\n"
        "a,ds1,0.8,1,1\nb,ds1,0.7,1,1\nb,ds2,0.6,1,1\n");
    CHECK_THROWS_AS(impute_matrix(m, {5, 1e-6, 100}), Error);
}

TEST_CASE("impute_matrix fills gaps and keeps observed values") {
    Rng rng(11);
    std::string csv = "algorithm_id,dataset_id,auc,train_ms,test_ms\n";
    for (int d = 0; d < 8; ++d)
        for (int a = 0; a < 4; ++a) {
            if (d == a) continue;  // punch a diagonal of holes
            csv += "alg" + std::to_string(a) + ",ds" + std::to_string(d) + "," +
                   std::to_string(0.5 + 0.05 * a) + "," + std::to_string(10 * (a + 1)) + ",1\n";
        }
    const EvalMatrix m = matrix_of(csv);
    REQUIRE(m.num_missing() == 4);
    const EvalMatrix full = impute_matrix(m, {2, 1e-9, 200});
    CHECK(full.complete());
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            if (m.mask(r, c)) {
                CHECK(full.auc(r, c) == m.auc(r, c));
                CHECK(full.train_ms(r, c) == m.train_ms(r, c));
            } else {
                CHECK(full.train_ms(r, c) > 0.0);  // times come back from log space positive
            }
        }
}

// --- remote ingestion -------------------------------------------------------

namespace {

struct LocalServer {
    httplib::Server server;
    std::thread thread;
    int port = 0;

    explicit LocalServer() {
        server.Get("/empty", [](const httplib::Request&, httplib::Response& res) {
            res.set_content("[]", "application/json");
        });
        server.Get("/one", [](const httplib::Request&, httplib::Response& res) {
            res.set_content(R"([{"algorithm_id":"rf","dataset_id":"ds1","auc":0.91,)"
                            R"("train_ms":120,"test_ms":3}])",
                            "application/json");
        });
        server.Get("/bad", [](const httplib::Request&, httplib::Response& res) {
            res.set_content(R"([{"algorithm_id":"rf","dataset_id":"ds1","auc":"x",)"
                            R"("train_ms":120,"test_ms":3}])",
                            "application/json");
        });
        server.Get("/slow", [](const httplib::Request&, httplib::Response& res) {
            std::this_thread::sleep_for(std::chrono::milliseconds(1500));
            res.set_content("[]", "application/json");
        });
        port = server.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }

    ~LocalServer() {
        server.stop();
        thread.join();
    }

    std::string url(const std::string& path) const {
        return "http://127.0.0.1:" + std::to_string(port) + path;
    }
};

}  // namespace

TEST_CASE("fetch_remote_records") {
    LocalServer server;

    SUBCASE("empty payload") {
        CHECK(fetch_remote_records(server.url("/empty"), 2000).empty());
    }
    SUBCASE("one valid object") {
        const auto records = fetch_remote_records(server.url("/one"), 2000);
        REQUIRE(records.size() == 1);
        CHECK(records[0].algorithm_id == "rf");
        CHECK(records[0].auc == 0.91);
    }
    SUBCASE("decode error names the element index") {
        try {
            fetch_remote_records(server.url("/bad"), 2000);
            FAIL("expected a decode error");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::decode);
            CHECK(std::string(e.what()).find("index 0") != std::string::npos);
        }
    }
    SUBCASE("404 is a transport error") {
        try {
            fetch_remote_records(server.url("/nope"), 2000);
            FAIL("expected a transport error");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::transport);
        }
    }
    SUBCASE("timeout is a transport error") {
        try {
            fetch_remote_records(server.url("/slow"), 200);
            FAIL("expected a transport error");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::transport);
        }
    }
}

TEST_CASE("fetch_remote_records rejects unreachable hosts") {
    try {
        fetch_remote_records("http://127.0.0.1:1/x", 500);
        FAIL("expected a transport error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::transport);
    }
}

TEST_CASE("parse_records_json validates like the CSV path") {
    const auto records = parse_records_json(nlohmann::json::parse(
        R"([{"algorithm_id":"a","dataset_id":"d","auc":1.0,"train_ms":0,"test_ms":0}])"));
    CHECK(records.size() == 1);
    CHECK_THROWS_AS(parse_records_json(nlohmann::json::parse(
                        R"([{"algorithm_id":"a","dataset_id":"d","auc":1.5,)"
                        R"("train_ms":0,"test_ms":0}])")),
                    Error);
    CHECK_THROWS_AS(parse_records_json(nlohmann::json::parse(
                        R"([{"algorithm_id":"a","dataset_id":"d","auc":"0.5",)"
                        R"("train_ms":0,"test_ms":0}])")),
                    Error);
}
