#ifndef LPDPL_MODEL_IO_HPP
#define LPDPL_MODEL_IO_HPP

#include <filesystem>

#include "lpdpl/solver.hpp"

namespace lpdpl {

// Single binary container, little-endian 64-bit floats, fixed field order:
// magic, version, feature pipeline, hyperparameters, n/m/Q, class names,
// per-class P/D/W, trailing FNV-1a checksum of everything before it.
// Round-trips are bitwise.
void save_model(const TrainedModel& model, const std::filesystem::path& path);

// Throws IoError (unreadable), CorruptModel (bad magic/truncation/checksum),
// VersionMismatch (unsupported format version).
TrainedModel load_model(const std::filesystem::path& path);

} // namespace lpdpl

#endif
