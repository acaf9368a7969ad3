package com.acme.app.util;

public final class Numbers {

    /**
     * @sketchlink 0cafe0008-0000-4000-8000-000000000008
     * @sketchlink 0cafe0009-0000-4000-8000-000000000009
     */
    public static int clamp(int v, int lo, int hi) {
        return Math.max(lo, Math.min(hi, v));
    }
}
