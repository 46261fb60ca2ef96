#include <cstdlib>
#include <string>

#include "polaris/kernels.hpp"

#include "tables.hpp"

namespace polaris::kernels {

namespace {

bool host_has_avx2() {
#ifdef POLARIS_HAVE_AVX2
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

struct Dispatch {
    const Ops* table;
    Isa isa;

    Dispatch() {
        isa = host_has_avx2() ? Isa::avx2 : Isa::scalar;
        if (const char* env = std::getenv("POLARIS_ISA")) {
            const std::string v(env);
            if (v == "scalar") isa = Isa::scalar;
            if (v == "avx2" && host_has_avx2()) isa = Isa::avx2;
        }
        table = select(isa);
    }

    static const Ops* select(Isa which) {
#ifdef POLARIS_HAVE_AVX2
        if (which == Isa::avx2) return &kAvx2Ops;
#endif
        (void)which;
        return &kScalarOps;
    }
};

Dispatch& dispatch() {
    static Dispatch d;
    return d;
}

}  // namespace

const Ops& ops() { return *dispatch().table; }

Isa active_isa() { return dispatch().isa; }

bool isa_supported(Isa isa) {
    return isa == Isa::scalar || (isa == Isa::avx2 && host_has_avx2());
}

bool set_isa(Isa isa) {
    if (!isa_supported(isa)) return false;
    dispatch().isa = isa;
    dispatch().table = Dispatch::select(isa);
    return true;
}

const Ops& ops_for(Isa isa) { return *Dispatch::select(isa); }

std::string isa_name(Isa isa) {
    return isa == Isa::avx2 ? "avx2" : "scalar";
}

}  // namespace polaris::kernels
