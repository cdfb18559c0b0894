#include "llmjoin/cli.hpp"

int main(int argc, char** argv) {
    return llmjoin::cli::run_cli(argc, argv);
}
