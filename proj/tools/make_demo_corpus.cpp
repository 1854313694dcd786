// Writes a small synthetic corpus in the mir-qbsh layout so the pipeline can
// be exercised without the real datasets:
//
//   hummit_demo_corpus <dir> [--songs N] [--queries-per-song M] [--seed S]

#include <cstdio>
#include <cstring>
#include <string>

#include "../tests/support/testsupport.hpp"

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr,
                     "usage: hummit_demo_corpus <dir> [--songs N] [--queries-per-song M] [--seed S]\n");
        return 1;
    }
    std::string dir = argv[1];
    testsupport::CorpusSpec spec;
    for (int i = 2; i < argc; ++i) {
        auto next_int = [&](auto& out) {
            if (i + 1 < argc) out = std::atoi(argv[++i]);
        };
        if (!std::strcmp(argv[i], "--songs")) next_int(spec.n_songs);
        else if (!std::strcmp(argv[i], "--queries-per-song")) next_int(spec.queries_per_song);
        else if (!std::strcmp(argv[i], "--seed")) next_int(spec.seed);
        else {
            std::fprintf(stderr, "unknown flag %s\n", argv[i]);
            return 1;
        }
    }
    try {
        testsupport::make_corpus(dir, spec);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    std::printf("wrote %d songs x %d queries under %s\n", spec.n_songs, spec.queries_per_song,
                dir.c_str());
    return 0;
}
