// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ilora/metrics.hpp"
#include "ilora/numerics.hpp"

namespace ilora {

enum class CheckpointRole : std::uint32_t { Working = 0, LongTerm = 1, Backbone = 2 };

const char* to_string(CheckpointRole role) noexcept;

/// Binary checkpoint, all fields little-endian:
///
///   offset  size  field
///   0       6     magic "ILORA1"
///   6       4     format version (u32, currently 1)
///   10      8     parameter count (u64)
///   18      4     task index (u32, 0 = before any task)
///   22      8     seed (u64)
///   30      4     role (u32: 0 working, 1 long-term, 2 backbone)
///   34      8·n   parameters as IEEE-754 binary64
struct Checkpoint {
    static constexpr std::uint32_t kFormatVersion = 1;
    static constexpr std::size_t kHeaderSize = 34;

    std::uint32_t task_index = 0;
    std::uint64_t seed = 0;
    CheckpointRole role = CheckpointRole::Working;
    ParamVector params;

    friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

std::vector<unsigned char> encode_checkpoint(const Checkpoint& ckpt);
/// Throws ErrorKind::Io on a malformed buffer.
Checkpoint decode_checkpoint(const std::vector<unsigned char>& bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
/// Throws ErrorKind::Missing naming the file when it does not exist.
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// 17 significant digits: parsing the text gives back the same double.
std::string format_real(double x);

void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

/// Header `after_task,eval_task,accuracy`, one row per defined entry, row-major.
std::string result_matrix_csv(const ResultMatrix& r);
ResultMatrix parse_result_matrix_csv(const std::string& text);

}  // namespace ilora
