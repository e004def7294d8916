def search():
    messages = ''
    ingredients, msg = find_entity_or_value(entity_aliases = [ 'ants on a tree'], relation_aliases = ['main ingredients', 'toppings'])
    messages += msg
    voice_actor, msg = find_entity_or_value(entity_aliases = ['Saber'], relation_aliases = ['dub', 'voice actor'])
    messages += msg
    return messages
