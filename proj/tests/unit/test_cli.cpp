#include "cli.hpp"
#include "../support/fixtures.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace randghep;
namespace fs = std::filesystem;
namespace rt = randghep::testing;
using nlohmann::json;

namespace {

class CliTest : public ::testing::Test {
protected:
    void SetUp() override
    {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() / (std::string("randghep_cli_") + info->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }

    void TearDown() override { fs::remove_all(dir_); }

    int run(std::vector<std::string> args)
    {
        args.insert(args.begin(), "randghep");
        std::vector<const char*> argv;
        for (const auto& a : args)
            argv.push_back(a.c_str());
        out_.str("");
        err_.str("");
        return cli::run(static_cast<int>(argv.size()), argv.data(), out_, err_);
    }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    std::string write_mtx(const std::string& name, const Matrix& M) const
    {
        save_matrix_market(path(name), M);
        return path(name);
    }

    json report(const std::string& sub) const
    {
        std::ifstream f(dir_ / sub / "report.json");
        return json::parse(f);
    }

    std::vector<std::vector<std::string>> csv(const std::string& rel) const
    {
        std::ifstream f(dir_ / rel);
        std::vector<std::vector<std::string>> rows;
        std::string line;
        while (std::getline(f, line)) {
            std::vector<std::string> cells;
            std::stringstream ss(line);
            std::string c;
            while (std::getline(ss, c, ','))
                cells.push_back(c);
            rows.push_back(cells);
        }
        return rows;
    }

    fs::path dir_;
    std::ostringstream out_, err_;
};

json strip_timing(json j)
{
    j.erase("wall_time_seconds");
    return j;
}

} // namespace

TEST_F(CliTest, SolveIdentityPencil)
{
    const auto I = write_mtx("I.mtx", Matrix::Identity(5, 5));
    ASSERT_EQ(run({"solve", "--A", I, "--B", I, "--k", "2", "--out", path("o")}), 0) << err_.str();
    const json r = report("o");
    const auto ev = r["result"]["eigenvalues"];
    ASSERT_EQ(ev.size(), 2u);
    EXPECT_NEAR(ev[0].get<double>(), 1.0, 1e-12);
    EXPECT_NEAR(ev[1].get<double>(), 1.0, 1e-12);
    EXPECT_EQ(r["config"]["p"], 3);
    EXPECT_EQ(r["config"]["p_source"], "default_clamped");
    EXPECT_TRUE(fs::exists(dir_ / "o" / "spectrum.csv"));
}

TEST_F(CliTest, SolveOracleColumnsOnExactRankPencil)
{
    const auto fx = rt::exact_rank_pencil(rt::random_spd(30, 1e3, 1), (Vector(3) << 5.0, 2.0, 1.0).finished(), 2);
    const auto A  = write_mtx("A.mtx", fx.A);
    const auto B  = write_mtx("B.mtx", fx.B);
    ASSERT_EQ(run({"solve", "--A", A, "--B", B, "--k", "3", "--p", "4", "--oracle", "--write-modes", "--out",
                   path("o")}),
              0)
        << err_.str();
    const auto rows = csv("o/spectrum.csv");
    ASSERT_EQ(rows.size(), 4u);
    EXPECT_EQ(rows[0][3], "abs_err");
    for (std::size_t i = 1; i < rows.size(); ++i) {
        EXPECT_LE(std::stod(rows[i][3]), 1e-10);
        EXPECT_EQ(rows[i][5], "true");
    }
    EXPECT_TRUE(report("o")["oracle"]["bounds_hold"].get<bool>());
    EXPECT_EQ(load_matrix_market(path("o/modes.mtx")).cols(), 3);
}

TEST_F(CliTest, SolveMethodsDifferOnlyInResults)
{
    const auto A = write_mtx("A.mtx", rt::random_spd(20, 100.0, 3));
    const auto B = write_mtx("B.mtx", rt::random_spd(20, 10.0, 4));
    ASSERT_EQ(run({"solve", "--A", A, "--B", B, "--k", "3", "--p", "3", "--seed", "9", "--out", path("a")}), 0);
    ASSERT_EQ(run({"solve", "--A", A, "--B", B, "--k", "3", "--p", "3", "--seed", "9", "--method", "single-pass",
                   "--out", path("b")}),
              0);
    json ra = strip_timing(report("a")), rb = strip_timing(report("b"));
    EXPECT_EQ(ra["seed"], rb["seed"]);
    EXPECT_NE(ra["result"]["method"], rb["result"]["method"]);
    ra["config"].erase("method");
    rb["config"].erase("method");
    EXPECT_EQ(ra["config"], rb["config"]);
}

TEST_F(CliTest, SolveIsReproducible)
{
    const auto A = write_mtx("A.mtx", rt::random_spd(20, 100.0, 5));
    const auto B = write_mtx("B.mtx", rt::random_spd(20, 10.0, 6));
    ASSERT_EQ(run({"solve", "--A", A, "--B", B, "--k", "4", "--seed", "3", "--out", path("a")}), 0);
    ASSERT_EQ(run({"solve", "--A", A, "--B", B, "--k", "4", "--seed", "3", "--out", path("b")}), 0);
    EXPECT_EQ(strip_timing(report("a")), strip_timing(report("b")));
}

TEST_F(CliTest, SolveEntropySeedIsRecorded)
{
    const auto I = write_mtx("I.mtx", Matrix::Identity(6, 6));
    ASSERT_EQ(run({"solve", "--A", I, "--B", I, "--k", "2", "--seed", "0", "--out", path("o")}), 0);
    const json r = report("o");
    EXPECT_EQ(r["seed_source"], "entropy");
    EXPECT_NE(r["seed"].get<std::uint64_t>(), 0u);
}

TEST_F(CliTest, SolveExitCodes)
{
    const auto I   = write_mtx("I.mtx", Matrix::Identity(5, 5));
    Matrix ind     = Matrix::Identity(5, 5);
    ind(4, 4)      = -1.0;
    const auto Bad = write_mtx("bad.mtx", ind);
    EXPECT_EQ(run({"solve", "--A", I, "--B", Bad, "--k", "2", "--out", path("o")}), 3);
    EXPECT_EQ(run({"solve", "--A", I, "--B", I, "--k", "9", "--out", path("o")}), 2);
    EXPECT_EQ(run({"solve", "--A", I, "--B", I, "--k", "2", "--method", "qz", "--out", path("o")}), 2);
    EXPECT_EQ(run({"solve", "--A", path("missing.mtx"), "--B", I, "--k", "2"}), 2);
    EXPECT_EQ(run({"solve", "--k", "2"}), 2);
    EXPECT_EQ(run({"frobnicate"}), 2);
    EXPECT_EQ(run({"--help"}), 0);
}

TEST_F(CliTest, KleWritesArtifacts)
{
    ASSERT_EQ(run({"kle", "--nu", "2.5", "--ell", "2", "--n", "101", "--k", "10", "--p", "5", "--out", path("k")}), 0)
        << err_.str();
    const auto rows = csv("k/spectrum.csv");
    ASSERT_EQ(rows.size(), 11u);
    EXPECT_EQ(rows[0], (std::vector<std::string>{"index", "lambda_approx", "lambda_oracle", "abs_err"}));
    EXPECT_LE(report("k")["relative_error"].get<double>(), 1e-4);
    const Matrix modes = load_matrix_market(path("k/modes.mtx"));
    EXPECT_EQ(modes.rows(), 101);
    EXPECT_EQ(modes.cols(), 10);
}

TEST_F(CliTest, KleRejectsBadKernel)
{
    EXPECT_EQ(run({"kle", "--nu", "3", "--out", path("k")}), 2);
    EXPECT_EQ(run({"kle", "--ell", "-1", "--out", path("k")}), 2);
}

TEST_F(CliTest, GsvdReport)
{
    const Matrix U0 = rt::random_orthonormal(12, 2, 7);
    const Matrix V0 = rt::random_orthonormal(9, 2, 8);
    const Matrix A  = U0 * (Vector(2) << 3.0, 1.0).finished().asDiagonal() * V0.transpose();
    ASSERT_EQ(run({"gsvd", "--A", write_mtx("A.mtx", A), "--S", write_mtx("S.mtx", Matrix::Identity(12, 12)), "--T",
                   write_mtx("T.mtx", Matrix::Identity(9, 9)), "--k", "2", "--p", "3", "--out", path("g")}),
              0)
        << err_.str();
    const json r = report("g");
    EXPECT_NEAR(r["result"]["sigma"][0].get<double>(), 3.0, 1e-12);
    EXPECT_NEAR(r["result"]["sigma"][1].get<double>(), 1.0, 1e-12);
}

TEST_F(CliTest, EstimateHugeToleranceDoesNotGrow)
{
    ASSERT_EQ(run({"estimate", "--nu", "1.5", "--n", "101", "--k", "10", "--p", "5", "--tol", "1e6", "--grow",
                   "--out", path("e")}),
              0)
        << err_.str();
    const json r = report("e")["result"];
    EXPECT_EQ(r["trajectory"].size(), 1u);
    EXPECT_EQ(r["final_columns"], 15);
    EXPECT_TRUE(r["converged"].get<bool>());
    EXPECT_EQ(r["binv_source"], "crude_lower_bound");
}

TEST_F(CliTest, EstimateReportsFields)
{
    ASSERT_EQ(run({"estimate", "--nu", "1.5", "--n", "101", "--k", "10", "--p", "5", "--oracle", "--out", path("e")}),
              0)
        << err_.str();
    const json r = report("e")["result"];
    for (const char* key : {"e", "alpha", "r", "probability_floor", "binv_source", "f_exact"})
        EXPECT_TRUE(r.contains(key)) << key;
    EXPECT_NEAR(r["probability_floor"].get<double>(), 1.0 - 1e-5, 1e-15);
    EXPECT_EQ(run({"estimate", "--nu", "1.5", "--alpha", "1", "--out", path("e")}), 2);
}

TEST_F(CliTest, EstimateGrowthStopsNearOracleSize)
{
    const double tol = 1e-6;
    const Index n    = 201;
    const std::uint64_t seed = 5;
    const KleProblem prob(Grid1D{-1.0, 1.0, n}, MaternConfig{MaternNu::five_halves, 2.0});
    const RangeErrorOracle f(prob.dense_A(), prob.M->dense());
    const Matrix Y = prob.pencil().apply_c(gaussian_matrix(n, 120, seed));
    const DenseSpd M{prob.M->dense()};
    const BOrthoBasis full = mgs_w_reorth(Y, M);
    Index kstar = 0;
    for (Index c = 1; c <= 120; ++c)
        if (f(full.Q.leftCols(c)) <= tol) {
            kstar = c;
            break;
        }
    ASSERT_GT(kstar, 0);
    const std::string binv = std::to_string(f.geometry().binv_norm());
    ASSERT_EQ(run({"estimate", "--nu", "2.5", "--n", std::to_string(n), "--k", "5", "--p", "5", "--alpha", "1.5",
                   "--r", "3", "--binv", binv, "--tol", "1e-6", "--grow", "--seed", std::to_string(seed), "--out",
                   path("e")}),
              0)
        << err_.str();
    const json r = report("e")["result"];
    EXPECT_TRUE(r["converged"].get<bool>());
    EXPECT_LE(r["final_columns"].get<Index>(), kstar + 10) << "oracle size " << kstar;
    EXPECT_EQ(r["binv_source"], "exact_binv_norm");
}

TEST_F(CliTest, QrBenchTable)
{
    ASSERT_EQ(run({"qr-bench", "--out", path("qr.csv")}), 0) << err_.str();
    const auto rows = csv("qr.csv");
    ASSERT_EQ(rows.size(), 10u);
    EXPECT_EQ(rows[0], (std::vector<std::string>{"alg", "kernel", "m1", "m2", "m3", "m4"}));
    for (std::size_t i = 1; i < rows.size(); ++i) {
        EXPECT_LE(std::stod(rows[i][2]), 1e-13) << rows[i][0] << ' ' << rows[i][1];
        if (rows[i][0] == "mgs-r" && rows[i][1] == "matern0.5") {
            EXPECT_LE(std::stod(rows[i][3]), 1e-13);
        }
        if (rows[i][0] == "mgs" && rows[i][1] == "matern2.5") {
            EXPECT_GE(std::stod(rows[i][3]), 1e-8);
        }
    }
}

TEST_F(CliTest, SvdModes)
{
    Matrix A = Matrix::Zero(8, 8);
    A.diagonal().head(3) << 4.0, 2.0, 1.0;
    const auto file = write_mtx("A.mtx", A);
    for (const char* mode : {"svd", "evd-two-pass", "evd-single-pass"}) {
        ASSERT_EQ(run({"svd", "--A", file, "--k", "3", "--p", "2", "--mode", mode, "--out", path(mode)}), 0)
            << mode << err_.str();
        const json r = report(mode);
        EXPECT_EQ(r["config"]["mode"], mode);
    }
    EXPECT_EQ(run({"svd", "--A", file, "--k", "3", "--mode", "qr", "--out", path("x")}), 2);
}

TEST_F(CliTest, ThreadsVariableIsValidated)
{
    const auto I = write_mtx("I.mtx", Matrix::Identity(5, 5));
    ::setenv("RANDGHEP_THREADS", "zero", 1);
    EXPECT_EQ(run({"solve", "--A", I, "--B", I, "--k", "2", "--out", path("o")}), 2);
    ::setenv("RANDGHEP_THREADS", "1", 1);
    EXPECT_EQ(run({"solve", "--A", I, "--B", I, "--k", "2", "--out", path("o")}), 0);
    EXPECT_EQ(report("o")["threads"], 1);
    ::unsetenv("RANDGHEP_THREADS");
}

TEST_F(CliTest, ExecutableVersionAndExitCode)
{
    const std::string exe = RANDGHEP_CLI_PATH;
    EXPECT_EQ(std::system((exe + " --version > " + path("v.txt")).c_str()), 0);
    std::ifstream f(dir_ / "v.txt");
    std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    EXPECT_NE(text.find(kVersion), std::string::npos);
    const int status = std::system((exe + " solve --k 2 > /dev/null 2>&1").c_str());
    EXPECT_EQ(WEXITSTATUS(status), 2);
}
