#include "sparsevine/cli.hpp"

int main(int argc, char** argv)
{
  return sparsevine::run_cli(argc, argv);
}
