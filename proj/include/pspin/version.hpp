#pragma once

#define PSPIN_VERSION "0.1.0"
