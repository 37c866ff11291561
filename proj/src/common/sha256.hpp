#pragma once

#include <cstdint>
#include <string>

namespace newsrank {

// SHA-256 (FIPS 180-4), used for manifest digests.
class Sha256 {
public:
    Sha256();
    void update(const void* data, std::size_t len);
    // finalizes and returns lowercase hex; object must not be reused afterwards
    std::string hex_digest();

private:
    void process_block(const std::uint8_t* block);

    std::uint32_t state_[8];
    std::uint64_t total_len_ = 0;
    std::uint8_t buffer_[64];
    std::size_t buffer_len_ = 0;
};

std::string sha256_hex(const std::string& bytes);
std::string sha256_file_hex(const std::string& path);  // throws InputError if unreadable

}  // namespace newsrank
