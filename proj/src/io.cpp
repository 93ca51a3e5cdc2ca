// SPDX-License-Identifier: Apache-2.0
#include "ilora/io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>

#include "ilora/error.hpp"

namespace ilora {

namespace {

constexpr char kMagic[6] = {'I', 'L', 'O', 'R', 'A', '1'};

template <typename T>
void put_le(std::vector<unsigned char>& out, T value) {
    for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<unsigned char>(value >> (8 * i)));
}

template <typename T>
T get_le(const std::vector<unsigned char>& in, std::size_t offset) {
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(in[offset + i]) << (8 * i);
    return value;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, sep)) out.push_back(field);
    return out;
}

}  // namespace

const char* to_string(CheckpointRole role) noexcept {
    switch (role) {
        case CheckpointRole::Working: return "working";
        case CheckpointRole::LongTerm: return "longterm";
        case CheckpointRole::Backbone: return "backbone";
    }
    return "?";
}

std::vector<unsigned char> encode_checkpoint(const Checkpoint& ckpt) {
    std::vector<unsigned char> out;
    out.reserve(Checkpoint::kHeaderSize + 8 * ckpt.params.size());
    out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
    put_le<std::uint32_t>(out, Checkpoint::kFormatVersion);
    put_le<std::uint64_t>(out, ckpt.params.size());
    put_le<std::uint32_t>(out, ckpt.task_index);
    put_le<std::uint64_t>(out, ckpt.seed);
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(ckpt.role));
    for (double v : ckpt.params) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
    return out;
}

Checkpoint decode_checkpoint(const std::vector<unsigned char>& bytes) {
    if (bytes.size() < Checkpoint::kHeaderSize || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0)
        throw Error(ErrorKind::Io, "checkpoint: bad magic or truncated header");
    const auto version = get_le<std::uint32_t>(bytes, 6);
    if (version != Checkpoint::kFormatVersion)
        throw Error(ErrorKind::Io, "checkpoint: unsupported format version " + std::to_string(version));
    const auto count = get_le<std::uint64_t>(bytes, 10);
    if (bytes.size() != Checkpoint::kHeaderSize + 8 * count)
        throw Error(ErrorKind::Io, "checkpoint: payload length does not match parameter count");
    const auto role = get_le<std::uint32_t>(bytes, 30);
    if (role > 2) throw Error(ErrorKind::Io, "checkpoint: unknown role flag");

    Checkpoint ckpt;
    ckpt.task_index = get_le<std::uint32_t>(bytes, 18);
    ckpt.seed = get_le<std::uint64_t>(bytes, 22);
    ckpt.role = static_cast<CheckpointRole>(role);
    std::vector<double> params(count);
    for (std::size_t i = 0; i < count; ++i)
        params[i] = std::bit_cast<double>(get_le<std::uint64_t>(bytes, Checkpoint::kHeaderSize + 8 * i));
    ckpt.params = ParamVector(std::move(params));
    return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
    const auto bytes = encode_checkpoint(ckpt);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot open for writing: " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorKind::Io, "write failed: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw Error(ErrorKind::Missing, "missing checkpoint: " + path.string());
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open: " + path.string());
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_checkpoint(bytes);
}

std::string format_real(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot open for writing: " + path.string());
    out << text;
    if (!out) throw Error(ErrorKind::Io, "write failed: " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw Error(ErrorKind::Missing, "missing file: " + path.string());
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string result_matrix_csv(const ResultMatrix& r) {
    std::string out = "after_task,eval_task,accuracy\n";
    for (std::size_t t = 1; t <= r.tasks(); ++t)
        for (std::size_t j = 1; j <= t; ++j)
            out += std::to_string(t) + "," + std::to_string(j) + "," + format_real(r.at(t, j)) + "\n";
    return out;
}

ResultMatrix parse_result_matrix_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "after_task,eval_task,accuracy")
        throw Error(ErrorKind::Io, "results_matrix.csv: unexpected header");
    std::map<std::pair<std::size_t, std::size_t>, double> entries;
    std::size_t tasks = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split(line, ',');
        if (f.size() != 3) throw Error(ErrorKind::Io, "results_matrix.csv: malformed row '" + line + "'");
        try {
            const std::size_t t = std::stoul(f[0]);
            const std::size_t j = std::stoul(f[1]);
            entries[{t, j}] = std::stod(f[2]);
            tasks = std::max(tasks, t);
        } catch (const std::logic_error&) {
            throw Error(ErrorKind::Io, "results_matrix.csv: malformed row '" + line + "'");
        }
    }
    if (tasks == 0) throw Error(ErrorKind::Io, "results_matrix.csv: no rows");
    ResultMatrix r(tasks);
    for (std::size_t t = 1; t <= tasks; ++t)
        for (std::size_t j = 1; j <= t; ++j) {
            auto it = entries.find({t, j});
            if (it == entries.end()) throw Error(ErrorKind::Io, "results_matrix.csv: missing entry");
            r.set(t, j, it->second);
        }
    return r;
}

}  // namespace ilora
