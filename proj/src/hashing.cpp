#include "shapecomplete/hashing.hpp"

#include "shapecomplete/error.hpp"

#include <openssl/evp.h>

#include <cstdint>
#include <cstring>
#include <fstream>
#include <memory>

namespace shapecomplete {

namespace {

class Sha256
{
public:
    Sha256() : ctx_(EVP_MD_CTX_new(), &EVP_MD_CTX_free)
    {
        if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1)
            throw std::runtime_error("SHA-256 initialisation failed");
    }

    void update(const void* data, std::size_t size) { EVP_DigestUpdate(ctx_.get(), data, size); }

    std::string hex()
    {
        unsigned char digest[EVP_MAX_MD_SIZE];
        unsigned int len = 0;
        EVP_DigestFinal_ex(ctx_.get(), digest, &len);
        static constexpr char digits[] = "0123456789abcdef";
        std::string out;
        out.reserve(2 * len);
        for (unsigned int i = 0; i < len; ++i)
        {
            out.push_back(digits[digest[i] >> 4]);
            out.push_back(digits[digest[i] & 0xf]);
        }
        return out;
    }

private:
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

} // namespace

std::string sha256_hex(std::span<const unsigned char> bytes)
{
    Sha256 h;
    h.update(bytes.data(), bytes.size());
    return h.hex();
}

std::string sha256_hex(const std::string& text)
{
    Sha256 h;
    h.update(text.data(), text.size());
    return h.hex();
}

std::string file_sha256(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open '" + path + "' for hashing");
    Sha256 h;
    char buf[1 << 16];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0)
        h.update(buf, static_cast<std::size_t>(in.gcount()));
    return h.hex();
}

std::string mesh_hash(const TriMesh& mesh)
{
    Sha256 h;
    for (const Point3& p : mesh.vertices())
        for (int k = 0; k < 3; ++k)
        {
            const double v = p[k];
            h.update(&v, sizeof(v));
        }
    for (const Face& f : mesh.faces())
        for (int v : f)
        {
            const std::int32_t i = v;
            h.update(&i, sizeof(i));
        }
    return h.hex();
}

std::string combined_hash(const std::vector<std::string>& hashes, int excluded)
{
    Sha256 h;
    for (std::size_t i = 0; i < hashes.size(); ++i)
    {
        if (static_cast<int>(i) == excluded)
            continue;
        h.update(hashes[i].data(), hashes[i].size());
        h.update("\n", 1);
    }
    return h.hex();
}

} // namespace shapecomplete
