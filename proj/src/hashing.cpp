#include "metamaint/hashing.hpp"

#include <openssl/evp.h>

#include <array>
#include <memory>
#include <stdexcept>

namespace metamaint {

namespace {

struct DigestContext {
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx{EVP_MD_CTX_new(), &EVP_MD_CTX_free};

    DigestContext()
    {
        if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha1(), nullptr) != 1)
            throw std::runtime_error("sha1: digest init failed");
    }

    void update(std::string_view data)
    {
        if (EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1)
            throw std::runtime_error("sha1: digest update failed");
    }

    std::string hex()
    {
        std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
        unsigned int len = 0;
        if (EVP_DigestFinal_ex(ctx.get(), md.data(), &len) != 1)
            throw std::runtime_error("sha1: digest final failed");
        static constexpr char digits[] = "0123456789abcdef";
        std::string out;
        out.reserve(len * 2);
        for (unsigned int i = 0; i < len; ++i) {
            out.push_back(digits[md[i] >> 4]);
            out.push_back(digits[md[i] & 0xf]);
        }
        return out;
    }
};

} // namespace

std::string sha1_hex(std::string_view data)
{
    DigestContext d;
    d.update(data);
    return d.hex();
}

std::string git_blob_hash(std::string_view content)
{
    DigestContext d;
    std::string header = "blob " + std::to_string(content.size());
    header.push_back('\0');
    d.update(header);
    d.update(content);
    return d.hex();
}

} // namespace metamaint
