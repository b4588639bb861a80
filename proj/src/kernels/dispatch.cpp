#include "fosls/kernels.hpp"

#include <cstdlib>
#include <cstring>
#include <mutex>

namespace fosls::kernels {

const KernelTable* avx2_table_impl();  // defined in kernels_avx2.cpp

bool avx2_available() {
#if defined(__x86_64__) || defined(_M_X64)
    if (avx2_table_impl() == nullptr) return false;
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const KernelTable* avx2_table() { return avx2_available() ? avx2_table_impl() : nullptr; }

namespace {
const KernelTable* select() {
    if (const char* isa = std::getenv("FOSLS_ISA"); isa && std::strcmp(isa, "scalar") == 0)
        return &scalar_table();
    if (const KernelTable* t = avx2_table()) return t;
    return &scalar_table();
}
}  // namespace

const KernelTable& active() {
    static const KernelTable* t = select();
    return *t;
}

std::string active_name() { return active().name; }

}  // namespace fosls::kernels
