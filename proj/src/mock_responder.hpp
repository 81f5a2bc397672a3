#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ifpref/backend.hpp"
#include "ifpref/mock_backend.hpp"

namespace ifpref::mock {

struct Continuation {
  std::string text;
  std::vector<std::string> tokens;  // concatenation equals text
  bool finished = false;
};

// Continues `prefix` as a response to `prompt` under `specs`. Output is a
// pure function of the arguments; whole lines are emitted while they fit in
// `max_tokens`.
Continuation continue_response(const MockConfig& config, std::string_view prompt,
                               std::span<const ConstraintSpec> specs, std::string_view prefix, int max_tokens,
                               std::uint64_t seed);

// Whitespace-delimited chunks with trailing whitespace attached.
std::vector<std::string> chunk_tokens(std::string_view text);

}  // namespace ifpref::mock
