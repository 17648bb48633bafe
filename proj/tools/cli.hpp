#pragma once
namespace hypermerw::cli { int run(int argc, char** argv); }
