#include "memd/driver.hpp"

int main(int argc, char** argv) { return memd::run_cli(argc, argv); }
