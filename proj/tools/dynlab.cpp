// CLI entry point; subcommands are implemented after the library core.
#include <cstdio>

int main() {
    std::puts("dynlab: not yet wired");
    return 2;
}
