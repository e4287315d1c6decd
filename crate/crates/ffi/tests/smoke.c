// Copyright 2026 The boqc Developers
//
// Licensed under the Apache License, Version 2.0 (the "License"); you may not use this file except
// in compliance with the License. You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software distributed under the License
// is distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express
// or implied. See the License for the specific language governing permissions and limitations under
// the License.

#include <stdio.h>
#include <string.h>

#include "boqc.h"

int main(void) {
    BoqcPattern *p = NULL;
    if (boqc_pattern_fixture("fig4", &p) != BOQC_STATUS_OK) {
        fprintf(stderr, "fixture: %s\n", boqc_last_error());
        return 1;
    }
    uint64_t counts[4];
    if (boqc_pattern_run(p, 2, 100, 1, counts, 4) != BOQC_STATUS_OK || counts[2] != 100) {
        fprintf(stderr, "run failed\n");
        return 1;
    }
    boqc_pattern_free(p);
    BoqcPattern *q = NULL;
    if (boqc_pattern_from_json("{", &q) != BOQC_STATUS_PARSE_ERROR || q != NULL) {
        return 1;
    }
    if (strstr(boqc_last_error(), "malformed") == NULL) {
        return 1;
    }
    printf("ok %s\n", boqc_version());
    return 0;
}
