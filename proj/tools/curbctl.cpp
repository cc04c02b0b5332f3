#include <string>
#include <vector>

#include "commands.hpp"

int main(int argc, char** argv) { return curb::cli::run(std::vector<std::string>(argv, argv + argc)); }
