#include "nggmix/app.hpp"

int main(int argc, char** argv) { return nggmix::cli_main(argc, argv); }
