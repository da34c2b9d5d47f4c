// Acceptance suite: one pass/fail line per criterion. With no argument all
// criteria run in order; with a numeric argument only that criterion runs.
// Exit code 0 iff every executed criterion passed.

#include <cstdio>
#include <cstdlib>
#include <exception>
#include <string>
#include <vector>

#include "extremal_sv/verify.hpp"

int main(int argc, char** argv) {
    std::vector<int> ids;
    if (argc > 1) {
        const int id = std::atoi(argv[1]);
        if (id < 1 || id > extremal_sv::check_count) {
            std::fprintf(stderr, "usage: %s [criterion 1..%d]\n", argv[0],
                         extremal_sv::check_count);
            return 2;
        }
        ids.push_back(id);
    } else {
        for (int id = 1; id <= extremal_sv::check_count; ++id) ids.push_back(id);
    }

    bool all_pass = true;
    for (int id : ids) {
        try {
            const auto res = extremal_sv::run_check(id);
            all_pass = all_pass && res.pass;
            std::printf("%s criterion %d: %s [%.2fs]\n", res.pass ? "PASS" : "FAIL", res.id,
                        res.name.c_str(), res.seconds);
            for (const auto& note : res.notes)
                if (!res.pass || note.rfind("model", 0) == 0)
                    std::printf("    %s\n", note.c_str());
        } catch (const std::exception& ex) {
            all_pass = false;
            std::printf("FAIL criterion %d: exception: %s\n", id, ex.what());
        }
        std::fflush(stdout);
    }
    return all_pass ? 0 : 1;
}
