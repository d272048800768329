#pragma once

#include <string>
#include <vector>

namespace edgeflow {

// Writes `content` to `path` atomically (temp file in the same directory,
// then rename). Throws std::runtime_error on I/O failure.
void atomic_write_file(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

// Splits on single `sep` characters; empty fields are preserved.
std::vector<std::string> split(const std::string& line, char sep);

// Whitespace tokenization + ASCII lowercasing, as used by the chat REPL.
std::vector<std::string> tokenize_line(const std::string& line);

std::string ascii_lower(std::string s);

// Log levels gated by the EDGEFLOW_LOG environment variable:
// unset/0 = warnings only, 1 = info, 2 = debug. Messages go to stderr.
int log_verbosity();
void log_warn(const std::string& msg);
void log_info(const std::string& msg);
void log_debug(const std::string& msg);

}  // namespace edgeflow
