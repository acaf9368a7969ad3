package com.acme.io;

public class Cache {
    /** @sketchlink 0cafe0016-0000-4000-8000-000000000016 */
    private int[] sizes = {16, 32, 64};

    static int hits;

    /** @sketchlink 0cafe0017-0000-4000-8000-000000000017 */
    static {
        hits = 0;
    }
}
