#include "lapsom/cli.hpp"

int main(int argc, char** argv)
{
    return lapsom::cli::main(argc, argv);
}
