#pragma once

// Umbrella header for the Robin inequality toolkit.

#include "robin/beta_table.hpp"
#include "robin/colossally_abundant.hpp"
#include "robin/divisors.hpp"
#include "robin/errors.hpp"
#include "robin/exact.hpp"
#include "robin/exceptions.hpp"
#include "robin/factorization.hpp"
#include "robin/families.hpp"
#include "robin/interval.hpp"
#include "robin/mertens.hpp"
#include "robin/parallel.hpp"
#include "robin/report.hpp"
#include "robin/sieve.hpp"
#include "robin/sigma_sieve.hpp"
#include "robin/version.hpp"
