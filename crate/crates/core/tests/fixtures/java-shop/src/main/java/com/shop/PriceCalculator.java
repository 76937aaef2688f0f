package com.shop;

public class PriceCalculator {
    private final Inventory inventory;

    public PriceCalculator(Inventory inventory) {
        this.inventory = inventory;
    }

    public Money total(String sku, int quantity, Money unitPrice) {
        if (inventory.count(sku) < quantity) {
            throw new IllegalStateException("out of stock: " + sku);
        }
        Money total = unitPrice.times(quantity);
        if (quantity >= 10) {
            total = total.add(new Money(-total.getCents() / 10));
        }
        return total;
    }

    private boolean isBulk(int quantity) {
        return quantity >= 10;
    }
}
