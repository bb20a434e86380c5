#pragma once

// Shared test utilities: temp directories, CLI invocation, PTB-XL-shaped
// fixtures, and the independent oracles used by the unit and acceptance
// suites.

#include <array>
#include <atomic>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <random>
#include <stdexcept>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

namespace testsupport {

namespace fs = std::filesystem;

class TempDir {
public:
    TempDir() {
        static std::atomic<unsigned> counter{0};
        std::random_device rd;
        std::ostringstream name;
        name << "ecgscreen-test-" << ::getpid() << '-' << counter++ << '-' << (rd() % 100000);
        path_ = fs::temp_directory_path() / name.str();
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& name) const { return path_ / name; }

private:
    fs::path path_;
};

inline void write_file(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw std::runtime_error("cannot write " + path.string());
    std::fwrite(text.data(), 1, text.size(), f);
    std::fclose(f);
}

inline void write_bytes(const fs::path& path, const std::vector<std::uint8_t>& bytes) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw std::runtime_error("cannot write " + path.string());
    std::fwrite(bytes.data(), 1, bytes.size(), f);
    std::fclose(f);
}

inline std::string read_file(const fs::path& path) {
    std::FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) throw std::runtime_error("cannot open " + path.string());
    std::string out;
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, f)) > 0) out.append(buf, n);
    std::fclose(f);
    return out;
}

#ifdef ECGSCREEN_CLI_PATH
struct CliResult {
    int exit_code = -1;
    std::string output; // stdout and stderr merged
};

inline CliResult run_cli(const std::string& args) {
    CliResult result;
    std::string command = std::string(ECGSCREEN_CLI_PATH) + " " + args + " 2>&1";
    std::FILE* pipe = ::popen(command.c_str(), "r");
    if (!pipe) throw std::runtime_error("popen failed: " + command);
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) result.output.append(buf, n);
    int status = ::pclose(pipe);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}
#endif

// --- PTB-XL-shaped metadata fixture -------------------------------------

// Twelve rows: RVH / RAO/RAE positives (including one with the PTB-XL
// "stated but unquantified" likelihood 0), NORM controls, a sub-threshold
// RVH mention and one unrelated diagnosis.
inline std::string fixture_metadata_csv() {
    return
        "ecg_id,patient_id,age,sex,height,weight,report,scp_codes,filename_lr,filename_hr\n"
        "1,101,56.0,1,,63.0,report a,\"{'RVH': 100.0}\",,\n"
        "2,102,71.0,0,172.0,81.0,report b,\"{'RVH': 80.0, 'SR': 0.0}\",,\n"
        "3,103,62.0,1,160.0,,report c,\"{'RAO/RAE': 100.0}\",,\n"
        "4,104,58.0,0,181.0,90.0,report d,\"{'RVH': 0.0, 'NORM': 0.0}\",,\n"
        "5,105,44.0,1,165.0,61.0,report e,\"{'NORM': 100.0, 'SR': 0.0}\",,\n"
        "6,106,35.0,0,178.0,77.0,report f,\"{'NORM': 100.0}\",,\n"
        "7,107,29.0,1,158.0,55.0,report g,\"{'NORM': 80.0}\",,\n"
        "8,108,,0,,,report h,\"{'NORM': 100.0}\",,\n"
        "9,109,66.0,1,162.0,70.0,report i,\"{'NORM': 55.0}\",,\n"
        "10,110,51.0,0,175.0,85.0,report j,\"{'RVH': 30.0, 'NORM': 100.0}\",,\n"
        "11,111,47.0,1,169.0,72.0,report k,\"{'IMI': 100.0}\",,\n"
        "12,112,80.0,0,171.0,79.0,report l,\"{'RAO/RAE': 65.0, 'AFIB': 100.0}\",,\n";
}

inline std::string fixture_scp_statements_csv() {
    return
        ",description,diagnostic_class\n"
        "RVH,right ventricular hypertrophy,HYP\n"
        "RAO/RAE,right atrial overload/enlargement,HYP\n"
        "NORM,normal ECG,NORM\n"
        "SR,sinus rhythm,\n"
        "IMI,inferior myocardial infarction,MI\n"
        "AFIB,\"atrial fibrillation, chronic\",CD\n";
}

// --- Independent WFDB fixture encoder ------------------------------------

// Writes header text and Fmt16 bytes directly, without any library code,
// so decoding can be checked against a second implementation.
struct FixtureRecord {
    std::string id;
    double sampling_rate = 100.0;
    std::vector<std::vector<std::int16_t>> adc; // 12 x N
    std::vector<double> gains;                  // per lead
    std::vector<int> baselines;                 // per lead
};

inline const std::array<const char*, 12>& fixture_lead_names() {
    static const std::array<const char*, 12> names = {
        "I", "II", "III", "AVR", "AVL", "AVF", "V1", "V2", "V3", "V4", "V5", "V6"};
    return names;
}

inline FixtureRecord make_fixture_record(std::uint64_t seed, std::size_t samples,
                                         double sampling_rate) {
    FixtureRecord rec;
    rec.id = "fix" + std::to_string(seed);
    rec.sampling_rate = sampling_rate;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> value(-3000, 3000);
    std::uniform_int_distribution<int> base(-50, 50);
    std::uniform_real_distribution<double> gain(500.0, 2000.0);
    for (int l = 0; l < 12; ++l) {
        std::vector<std::int16_t> lead(samples);
        for (auto& v : lead) v = static_cast<std::int16_t>(value(rng));
        rec.adc.push_back(std::move(lead));
        rec.gains.push_back(gain(rng));
        rec.baselines.push_back(base(rng));
    }
    return rec;
}

inline std::string fixture_header_text(const FixtureRecord& rec) {
    std::ostringstream hea;
    hea << rec.id << " 12 " << rec.sampling_rate << " " << rec.adc[0].size() << "\n";
    for (int l = 0; l < 12; ++l) {
        hea << rec.id << ".dat 16 " << rec.gains[l] << "(" << rec.baselines[l] << ")/mV 16 0 "
            << rec.adc[l][0] << " 0 0 " << fixture_lead_names()[l] << "\n";
    }
    hea << "# fixture record\n";
    return hea.str();
}

inline std::vector<std::uint8_t> fixture_dat_bytes(const FixtureRecord& rec) {
    std::vector<std::uint8_t> bytes;
    const std::size_t samples = rec.adc[0].size();
    for (std::size_t s = 0; s < samples; ++s) {
        for (int l = 0; l < 12; ++l) {
            auto u = static_cast<std::uint16_t>(rec.adc[l][s]);
            bytes.push_back(static_cast<std::uint8_t>(u & 0xff));
            bytes.push_back(static_cast<std::uint8_t>(u >> 8));
        }
    }
    return bytes;
}

} // namespace testsupport
