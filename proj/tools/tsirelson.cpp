#include "tsirelson/cli.hpp"

int main(int argc, char** argv)
{
    return tsirelson::cli::run_cli(argc, argv);
}
